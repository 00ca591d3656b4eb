#include "ppg/signal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "ppg/errors.hpp"
#include "ppg/rng.hpp"

namespace ppg {

namespace {

// Interval multipliers are clipped so the instantaneous beat rate stays
// inside the detector's plausible heart-rate band.
constexpr double kIntervalMultLo = 0.45;
constexpr double kIntervalMultHi = 1.80;

}  // namespace

Eigen::Index synth_sample_count(const SynthConfig& config) {
    if (!(config.duration_s > 0.0) || !(config.sample_rate_hz > 0.0)) {
        throw ConfigError("synth: duration_s and sample_rate_hz must be positive");
    }
    const double exact = config.duration_s * config.sample_rate_hz;
    const double rounded = std::llround(exact);
    if (std::abs(exact - rounded) > 1e-9 || rounded < 1) {
        std::ostringstream os;
        os << "synth: duration_s * sample_rate_hz = " << exact
           << " is not a positive integer sample count";
        throw ConfigError(os.str());
    }
    return static_cast<Eigen::Index>(rounded);
}

LabeledSignal synth_ppg(const SynthConfig& config, int label) {
    if (label != 0 && label != 1) {
        throw ArgumentError("synth_ppg: label must be 0 or 1");
    }
    if (!(config.beat_rate_hz_min > 0.0) || !(config.beat_rate_hz_max >= config.beat_rate_hz_min)) {
        throw ConfigError("synth_ppg: beat rate range must satisfy 0 < min <= max");
    }
    const Eigen::Index n = synth_sample_count(config);

    Rng rng(splitmix64(config.seed) + static_cast<std::uint64_t>(label));

    const double beat_rate = rng.uniform(config.beat_rate_hz_min, config.beat_rate_hz_max);
    const double base_interval = 1.0 / beat_rate;
    const double jitter =
        label == 1 ? config.af_interval_jitter : config.non_af_interval_jitter;

    const double wander_amp = config.baseline_wander_amplitude;
    const double wander_hz =
        rng.uniform(config.baseline_wander_hz_min, config.baseline_wander_hz_max);
    const double wander_phase = rng.uniform(0.0, 2.0 * M_PI);

    // Beat times extend past both edges so border pulses are not clipped.
    struct Beat {
        double t;
        double amp;
    };
    std::vector<Beat> beats;
    double t = -2.0 * base_interval + rng.uniform() * base_interval;
    while (t < config.duration_s + 2.0 * base_interval) {
        const double amp = std::max(0.5, 1.0 + config.amplitude_jitter * rng.normal());
        beats.push_back({t, amp});
        const double mult =
            std::clamp(1.0 + jitter * rng.normal(), kIntervalMultLo, kIntervalMultHi);
        t += base_interval * mult;
    }

    const double sigma_s = config.systolic_width_s;
    const double sigma_d = config.diastolic_width_s;
    const double reach = config.diastolic_delay_s + 4.0 * std::max(sigma_s, sigma_d);
    const double dt = 1.0 / config.sample_rate_hz;

    Eigen::ArrayXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ti = static_cast<double>(i) * dt;
        double v = 0.5 * wander_amp * (1.0 + std::sin(2.0 * M_PI * wander_hz * ti + wander_phase));
        for (const Beat& b : beats) {
            const double d = ti - b.t;
            if (d < -reach || d > reach) continue;
            const double systolic = std::exp(-d * d / (2.0 * sigma_s * sigma_s));
            const double dd = d - config.diastolic_delay_s;
            const double diastolic =
                config.diastolic_amplitude * std::exp(-dd * dd / (2.0 * sigma_d * sigma_d));
            v += b.amp * (systolic + diastolic);
        }
        x[i] = v;
    }

    const double lo = x.minCoeff();
    const double hi = x.maxCoeff();
    if (!(hi > lo)) {
        throw NumericError("synth_ppg: generated signal has degenerate range");
    }
    x = (x - lo) / (hi - lo);

    std::ostringstream id;
    id << "synth-" << std::hex << config.seed << std::dec << "-" << label;
    return LabeledSignal{id.str(), Signal{std::move(x), config.sample_rate_hz}, label};
}

Signal add_noise(const Signal& signal, double sigma, double clamp_lo, double clamp_hi,
                 std::uint64_t seed) {
    if (sigma < 0.0) {
        throw ArgumentError("add_noise: sigma must be nonnegative");
    }
    if (!(clamp_lo < clamp_hi)) {
        throw ArgumentError("add_noise: clamp_lo must be strictly below clamp_hi");
    }
    Eigen::ArrayXd out = signal.samples;
    if (sigma > 0.0) {
        Rng rng(seed);
        for (Eigen::Index i = 0; i < out.size(); ++i) {
            out[i] += sigma * rng.normal();
        }
    }
    out = out.max(clamp_lo).min(clamp_hi);
    return Signal{std::move(out), signal.sample_rate_hz};
}

NormStats compute_normalization(const Dataset& dataset) {
    if (dataset.empty()) {
        throw ArgumentError("normalize: dataset is empty");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const LabeledSignal& r : dataset.records) {
        if (r.signal.length() == 0) {
            throw IntegrityError("normalize: record '" + r.id + "' has no samples");
        }
        lo = std::min(lo, r.signal.samples.minCoeff());
        hi = std::max(hi, r.signal.samples.maxCoeff());
    }
    return NormStats{lo, hi};
}

Dataset apply_normalization(const Dataset& dataset, const NormStats& stats) {
    if (!(stats.hi > stats.lo)) {
        throw NumericError("normalize: degenerate range, global min equals global max");
    }
    const double scale = 1.0 / (stats.hi - stats.lo);
    Dataset out;
    out.split = dataset.split;
    out.records.reserve(dataset.size());
    for (const LabeledSignal& r : dataset.records) {
        Eigen::ArrayXd s = (r.signal.samples - stats.lo) * scale;
        out.records.push_back({r.id, Signal{std::move(s), r.signal.sample_rate_hz}, r.label});
    }
    return out;
}

Dataset normalize_global(const Dataset& dataset) {
    return apply_normalization(dataset, compute_normalization(dataset));
}

std::vector<PairedSignals> pair_datasets(const Dataset& noisy, const Dataset& clean) {
    std::unordered_map<std::string, const LabeledSignal*> by_id;
    by_id.reserve(clean.size());
    for (const LabeledSignal& r : clean.records) {
        if (!by_id.emplace(r.id, &r).second) {
            throw IntegrityError("pair_datasets: duplicate id '" + r.id + "' in clean dataset");
        }
    }
    std::vector<PairedSignals> pairs;
    pairs.reserve(noisy.size());
    std::unordered_set<std::string> seen;
    for (const LabeledSignal& r : noisy.records) {
        if (!seen.insert(r.id).second) {
            throw IntegrityError("pair_datasets: duplicate id '" + r.id + "' in noisy dataset");
        }
        auto it = by_id.find(r.id);
        if (it == by_id.end()) {
            throw IntegrityError("pair_datasets: id '" + r.id + "' has no clean counterpart");
        }
        const LabeledSignal& c = *it->second;
        if (c.signal.length() != r.signal.length() ||
            c.signal.sample_rate_hz != r.signal.sample_rate_hz) {
            throw IntegrityError("pair_datasets: id '" + r.id +
                                 "' differs in length or sample rate between variants");
        }
        if (c.label != r.label) {
            throw IntegrityError("pair_datasets: id '" + r.id + "' differs in label");
        }
        pairs.push_back({r.id, r.signal, c.signal, r.label});
    }
    if (pairs.size() != clean.size()) {
        throw IntegrityError("pair_datasets: clean dataset has records missing from noisy dataset");
    }
    return pairs;
}

void validate_dataset(const Dataset& dataset) {
    std::unordered_set<std::string> ids;
    ids.reserve(dataset.size());
    for (const LabeledSignal& r : dataset.records) {
        if (!ids.insert(r.id).second) {
            throw IntegrityError("dataset: duplicate id '" + r.id + "'");
        }
        if (r.signal.length() < 1) {
            throw IntegrityError("dataset: record '" + r.id + "' has no samples");
        }
        if (!(r.signal.sample_rate_hz > 0.0)) {
            throw IntegrityError("dataset: record '" + r.id + "' has non-positive sample rate");
        }
        if (!r.signal.samples.isFinite().all()) {
            throw IntegrityError("dataset: record '" + r.id + "' contains non-finite samples");
        }
        if (r.label != 0 && r.label != 1) {
            throw IntegrityError("dataset: record '" + r.id + "' has label outside {0,1}");
        }
    }
}

}  // namespace ppg
