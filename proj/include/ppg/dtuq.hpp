#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ppg/classifier.hpp"
#include "ppg/distribution.hpp"
#include "ppg/signal.hpp"

namespace ppg {

// Loss of taking action a when the outcome turns out to be y. Rectangular
// and nonnegative; actions index rows, outcomes index columns.
struct LossMatrix {
    Eigen::MatrixXd entries;

    Eigen::Index num_actions() const { return entries.rows(); }
    Eigen::Index num_outcomes() const { return entries.cols(); }
};

// L[a][y] = 1 when a != y, 0 on the diagonal.
LossMatrix misclassification_loss(Eigen::Index k);

void validate_loss(const LossMatrix& loss);

// One denoised signal as the downstream decision layer sees it: the
// classifier's distribution plus its normalized entropy, and the true label
// when the caller knows it.
struct ScoredGeneration {
    std::string id;
    double uncertainty = 0.0;
    PredictiveDistribution probs;
    std::optional<int> label;
};

// -(1/log K) * sum p log p, with 0 log 0 = 0. Ranges over [0,1] regardless
// of K, so entropies are comparable across output sizes.
double normalized_entropy(const PredictiveDistribution& p);

// Expected loss of an action under p: sum_y L[action][y] * p_y.
double conditional_risk(const LossMatrix& loss, const PredictiveDistribution& p,
                        Eigen::Index action);

// The risk-minimizing action; ties go to the lowest index.
Eigen::Index bayes_action(const LossMatrix& loss, const PredictiveDistribution& p);

// Classify a denoised signal (clamped nonnegative first — generators may
// overshoot below zero) and report the entropy of the prediction.
ScoredGeneration score_generation(const ClassifierModel& model, const Signal& signal);
ScoredGeneration score_generation(const ClassifierModel& model,
                                  const LabeledSignal& record);

// Keeps the ceil(keep_fraction * N) items with the lowest uncertainty
// (ties broken by id), preserving the input order of the survivors.
std::vector<ScoredGeneration> filter_by_uncertainty(
    const std::vector<ScoredGeneration>& items, double keep_fraction);

// One JSON object per line: {"id","uncertainty","probs":[...],"label"?}.
// This file is the hand-off between the scoring and filtering stages.
void write_scored(const std::vector<ScoredGeneration>& items, const std::string& path);
std::vector<ScoredGeneration> read_scored(const std::string& path);

}  // namespace ppg
