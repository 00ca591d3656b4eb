#include "ppg/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <unsupported/Eigen/FFT>

namespace ppg {

namespace {

constexpr double kHeartRateCeilingHz = 3.5;
constexpr double kPeakHeightFraction = 0.4;   // of the signal's dynamic range
constexpr double kHighFrequencyCutHz = 8.0;   // beats live well below this
constexpr double kTiny = 1e-12;

double population_std(const Eigen::ArrayXd& values) {
    if (values.size() == 0) return 0.0;
    const double mean = values.mean();
    return std::sqrt((values - mean).square().mean());
}

// Normalized power distribution over the positive-frequency bins (DC
// excluded) and the matching bin frequencies. Empty when the spectrum is
// flat or the signal too short to have one.
std::pair<Eigen::ArrayXd, Eigen::ArrayXd> power_distribution(const Signal& signal) {
    const Eigen::Index n = signal.length();
    if (n < 4) return {};
    Eigen::FFT<double> fft;
    std::vector<double> time(signal.samples.data(), signal.samples.data() + n);
    std::vector<std::complex<double>> freq;
    fft.fwd(freq, time);
    const Eigen::Index bins = n / 2;  // bins 1..n/2
    Eigen::ArrayXd power(bins);
    Eigen::ArrayXd hz(bins);
    for (Eigen::Index k = 1; k <= bins; ++k) {
        power[k - 1] = std::norm(freq[static_cast<std::size_t>(k)]);
        hz[k - 1] = static_cast<double>(k) * signal.sample_rate_hz /
                    static_cast<double>(n);
    }
    const double total = power.sum();
    if (!(total > kTiny)) return {};
    return {power / total, hz};
}

}  // namespace

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = {
        "mean_interpeak_s", "std_interpeak_s",  "cv_interpeak",
        "rmssd_s",          "spectral_entropy", "hf_power_fraction",
        "peak_rate_hz",
    };
    return names;
}

std::string feature_schema() {
    std::string schema = "ppg-features/1:";
    for (const std::string& name : feature_names()) {
        schema += name;
        schema += ',';
    }
    return schema;
}

std::vector<Eigen::Index> detect_peaks(const Signal& signal) {
    const Eigen::Index n = signal.length();
    if (n < 3) return {};
    const double lo = signal.samples.minCoeff();
    const double hi = signal.samples.maxCoeff();
    if (!(hi > lo)) return {};
    const double threshold = lo + kPeakHeightFraction * (hi - lo);

    std::vector<Eigen::Index> candidates;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        if (signal.samples[i] > signal.samples[i - 1] &&
            signal.samples[i] > signal.samples[i + 1] &&
            signal.samples[i] >= threshold) {
            candidates.push_back(i);
        }
    }

    // Keep the tallest peaks first, rejecting anything closer to an accepted
    // peak than the heart-rate ceiling allows.
    std::sort(candidates.begin(), candidates.end(),
              [&](Eigen::Index a, Eigen::Index b) {
                  if (signal.samples[a] != signal.samples[b]) {
                      return signal.samples[a] > signal.samples[b];
                  }
                  return a < b;
              });
    const double min_distance = signal.sample_rate_hz / kHeartRateCeilingHz;
    std::vector<Eigen::Index> accepted;
    for (Eigen::Index c : candidates) {
        bool clear = true;
        for (Eigen::Index a : accepted) {
            if (std::abs(static_cast<double>(c - a)) < min_distance) {
                clear = false;
                break;
            }
        }
        if (clear) accepted.push_back(c);
    }
    std::sort(accepted.begin(), accepted.end());
    return accepted;
}

Eigen::VectorXd extract_features(const Signal& signal) {
    Eigen::VectorXd features = Eigen::VectorXd::Zero(kFeatureCount);
    const Eigen::Index n = signal.length();
    if (n < 2 || !(signal.sample_rate_hz > 0.0)) return features;

    const std::vector<Eigen::Index> peaks = detect_peaks(signal);
    if (peaks.size() >= 2) {
        Eigen::ArrayXd intervals(static_cast<Eigen::Index>(peaks.size()) - 1);
        for (std::size_t i = 1; i < peaks.size(); ++i) {
            intervals[static_cast<Eigen::Index>(i - 1)] =
                static_cast<double>(peaks[i] - peaks[i - 1]) / signal.sample_rate_hz;
        }
        const double mean = intervals.mean();
        const double std_dev = population_std(intervals);
        features[0] = mean;
        features[1] = std_dev;
        features[2] = mean > kTiny ? std_dev / mean : 0.0;
        if (intervals.size() >= 2) {
            const Eigen::ArrayXd diffs =
                intervals.tail(intervals.size() - 1) -
                intervals.head(intervals.size() - 1);
            features[3] = std::sqrt(diffs.square().mean());
        }
    }

    const auto [power, hz] = power_distribution(signal);
    if (power.size() >= 2) {
        double entropy = 0.0;
        for (Eigen::Index k = 0; k < power.size(); ++k) {
            if (power[k] > 0.0) entropy -= power[k] * std::log(power[k]);
        }
        features[4] = entropy / std::log(static_cast<double>(power.size()));
        features[5] = (hz > kHighFrequencyCutHz).select(power, 0.0).sum();
    }

    features[6] = static_cast<double>(peaks.size()) / signal.duration_s();
    return features;
}

}  // namespace ppg
