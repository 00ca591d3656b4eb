#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ppg/distribution.hpp"

namespace ppg {

// One item as the calibration audit sees it: how uncertain the model was,
// and whether its decision turned out correct.
struct ScoredOutcome {
    double uncertainty = 0.0;
    bool correct = false;
};

struct BinStats {
    int index = 0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double mean_uncert = 0.0;  // meaningful only when count > 0
    double mean_err = 0.0;     // mean of 1{incorrect}, likewise
};

struct LabeledPrediction {
    PredictiveDistribution probs;
    int label = 0;
};

// A model is taken as calibrated when a bin's error rate is half its mean
// uncertainty, so reliability diagrams carry a 0.5 reference slope.
inline constexpr double kCalibrationSlope = 0.5;

struct ReliabilityReport {
    std::vector<BinStats> bins;
    double uce = 0.0;
    std::size_t total = 0;
    std::optional<int> class_filter;
};

// Partitions [0,1] into M equal-width bins, the last closed at 1.0, and
// accumulates per-bin mean uncertainty and mean error.
std::vector<BinStats> bin_equal_width(const std::vector<ScoredOutcome>& items, int m);

// Count-weighted mean of |err(B) - 0.5 * uncert(B)| over occupied bins;
// `total` must equal the summed bin counts.
double uce(const std::vector<BinStats>& bins, std::size_t total);

// Scores each prediction by normalized entropy, marks it correct when the
// minimum-risk decision under misclassification loss hits the true label,
// and runs the binned audit. `class_filter` restricts to one true class.
ReliabilityReport reliability_report(const std::vector<LabeledPrediction>& predictions,
                                     int m, std::optional<int> class_filter);

void write_reliability_csv(const ReliabilityReport& report, const std::string& path);
void write_reliability_svg(const ReliabilityReport& report, const std::string& path);

}  // namespace ppg
