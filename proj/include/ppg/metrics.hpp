#pragma once

#include <string>
#include <vector>

#include "ppg/dtuq.hpp"

namespace ppg {

struct Confusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;
};

// Probability that a random positive outranks a random negative, ties
// credited one half (equals the trapezoidal area under the ROC curve).
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Positive prediction iff score >= threshold.
Confusion confusion_at_threshold(const std::vector<double>& scores,
                                 const std::vector<int>& labels, double threshold);

// Zero-denominator conventions: any zero factor under the MCC root yields 0,
// an empty F1 numerator-and-denominator yields 0, and an absent class
// contributes 0 to its balanced-accuracy term.
double mcc(const Confusion& c);
double f1(const Confusion& c);
double balanced_accuracy(const Confusion& c);
double sensitivity(const Confusion& c);
double specificity(const Confusion& c);

enum class BinaryMetric { Mcc, F1, BalancedAccuracy, Sensitivity, Specificity };
const char* metric_name(BinaryMetric metric);
double binary_metric(BinaryMetric metric, const Confusion& c);

enum class ConstraintKind { SensitivityAtLeast, SpecificityAtLeast };
struct Constraint {
    ConstraintKind kind = ConstraintKind::SensitivityAtLeast;
    double level = 0.8;
};

// Result of pinning a metric at an operating point. `achieved` is the
// constrained quantity at the chosen threshold; when no threshold meets the
// constraint, `feasible` is false and the numeric fields are NaN.
struct OperatingPoint {
    double value = 0.0;
    double threshold = 0.0;
    double achieved = 0.0;
    bool feasible = false;
};

// Scans every distinct score as a threshold, keeps those meeting the
// constraint, and picks minimal slack above it; ties prefer the higher
// metric, then the lower threshold.
OperatingPoint metric_at_operating_point(const std::vector<double>& scores,
                                         const std::vector<int>& labels,
                                         Constraint constraint, BinaryMetric metric);

double pearson(const std::vector<double>& x, const std::vector<double>& y);
// Pearson on average ranks; ties share the mean of their rank range.
double spearman(const std::vector<double>& x, const std::vector<double>& y);
std::vector<double> average_ranks(const std::vector<double>& values);

// The per-condition row layout of the comparison report.
struct OperatingPointMetrics {
    double auc = 0.0;
    double f1_at_half = 0.0;
    double balanced_accuracy_at_half = 0.0;
    OperatingPoint mcc_at_sens;
    OperatingPoint mcc_at_spec;
    OperatingPoint sensitivity_at_spec;
    OperatingPoint specificity_at_sens;
};

OperatingPointMetrics compute_operating_metrics(const std::vector<double>& scores,
                                                const std::vector<int>& labels,
                                                double operating_level);

struct ConditionRow {
    std::string condition;
    std::size_t count = 0;
    OperatingPointMetrics metrics;
};

struct ConditionReportConfig {
    double operating_level = 0.8;
    double filter_fraction = 0.75;  // annotation only; filtering happened upstream
};

struct ConditionReport {
    std::vector<ConditionRow> rows;
    ConditionReportConfig config;
};

// Four rows over the same id/label universe: the clean signals, their noisy
// versions, the denoised reconstructions, and the low-uncertainty subset of
// the denoised ones. Scores are the predicted probability of class 1.
ConditionReport condition_report(const std::vector<ScoredGeneration>& clean,
                                 const std::vector<ScoredGeneration>& noisy,
                                 const std::vector<ScoredGeneration>& denoised,
                                 const std::vector<std::string>& filtered_ids,
                                 const ConditionReportConfig& config);

void write_condition_csv(const ConditionReport& report, const std::string& path);
std::string render_condition_text(const ConditionReport& report);

}  // namespace ppg
