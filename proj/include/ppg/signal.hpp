#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace ppg {

// A finite real-valued time series; the unit of denoising and classification.
struct Signal {
    Eigen::ArrayXd samples;
    double sample_rate_hz = 32.0;

    Eigen::Index length() const { return samples.size(); }
    double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

struct LabeledSignal {
    std::string id;
    Signal signal;
    int label = 0;  // 0 = non-AF, 1 = AF
};

struct Dataset {
    std::string split;  // "train", "validation", "test", or "" when read back
    std::vector<LabeledSignal> records;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
};

// Synthetic pulse model: each beat is a two-Gaussian systolic/diastolic bump
// riding on a slow baseline oscillation; the AF class differs only in the
// coefficient of variation of its inter-beat intervals.
struct SynthConfig {
    double duration_s = 25.0;
    double sample_rate_hz = 32.0;
    double beat_rate_hz_min = 1.0;
    double beat_rate_hz_max = 1.5;
    double af_interval_jitter = 0.18;      // CV of beat intervals, AF class
    double non_af_interval_jitter = 0.05;  // CV of beat intervals, non-AF class
    double systolic_width_s = 0.09;
    double diastolic_width_s = 0.13;
    double diastolic_delay_s = 0.24;
    double diastolic_amplitude = 0.45;  // relative to the systolic peak
    double amplitude_jitter = 0.05;     // per-beat amplitude CV
    double baseline_wander_amplitude = 0.35;
    double baseline_wander_hz_min = 0.15;
    double baseline_wander_hz_max = 0.35;
    std::uint64_t seed = 0;
};

// Global affine normalization parameters (computed on one dataset, reusable
// on another so held-out splits share the training statistics).
struct NormStats {
    double lo = 0.0;
    double hi = 1.0;
};

// Validated sample count for a config; throws ConfigError when
// duration * rate is not a positive integer.
Eigen::Index synth_sample_count(const SynthConfig& config);

// Deterministic given (config.seed, label). Output normalized to [0, 1].
LabeledSignal synth_ppg(const SynthConfig& config, int label);

// out_i = clamp(in_i + g_i, clamp_lo, clamp_hi), g_i ~ N(0, sigma^2) i.i.d.
Signal add_noise(const Signal& signal, double sigma, double clamp_lo, double clamp_hi,
                 std::uint64_t seed);

NormStats compute_normalization(const Dataset& dataset);
Dataset apply_normalization(const Dataset& dataset, const NormStats& stats);

// Affine map of all samples so the dataset-wide min lands on 0 and max on 1.
Dataset normalize_global(const Dataset& dataset);

// Noisy/clean records matched by id; the unit the denoising GAN trains on.
struct PairedSignals {
    std::string id;
    Signal noisy;
    Signal clean;
    int label = 0;
};

// Pairs two datasets by id, enforcing a 1:1 match with identical per-id
// length and sample rate. Order follows the noisy dataset.
std::vector<PairedSignals> pair_datasets(const Dataset& noisy, const Dataset& clean);

// Throws IntegrityError on duplicate ids, empty or non-finite signals.
void validate_dataset(const Dataset& dataset);

}  // namespace ppg
