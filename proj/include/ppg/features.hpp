#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ppg/signal.hpp"

namespace ppg {

// Fixed feature order for the classifier. The schema string (names joined
// with a version suffix) is hashed into saved models so a model trained
// against one extractor cannot silently score features from another.
inline constexpr int kFeatureCount = 7;
const std::vector<std::string>& feature_names();
std::string feature_schema();

// Sample indices of detected pulse peaks, ascending. Strict local maxima
// above an amplitude threshold, thinned greedily by height so that no two
// peaks sit closer than sample_rate/3.5 samples (a 3.5 Hz heart-rate
// ceiling; rates below the 0.7 Hz floor simply yield long intervals).
std::vector<Eigen::Index> detect_peaks(const Signal& signal);

// Seven finite features: mean, std and coefficient of variation of the
// inter-peak intervals, RMSSD of those intervals, spectral entropy,
// high-frequency power fraction, and peak rate. Degenerate signals (no
// peaks, flat spectrum) produce zeros rather than failures.
Eigen::VectorXd extract_features(const Signal& signal);

}  // namespace ppg
