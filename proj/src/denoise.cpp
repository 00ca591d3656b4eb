#include "ppg/denoise.hpp"

#include <cmath>

#include "ppg/errors.hpp"

namespace ppg {

namespace {

double sinc(double x) {
    if (x == 0.0) return 1.0;
    return std::sin(M_PI * x) / (M_PI * x);
}

// Index into a signal extended by mirroring across its edges, edge sample
// repeated: j = -1 maps to 0, j = n maps to n-1. Valid for |overhang| < n.
Eigen::Index mirror_index(Eigen::Index j, Eigen::Index n) {
    if (j < 0) return -j - 1;
    if (j >= n) return 2 * n - 1 - j;
    return j;
}

Signal convolve_centered(const Eigen::VectorXd& taps, const Signal& signal) {
    const Eigen::Index n = signal.length();
    const Eigen::Index k = taps.size();
    if (n < k) {
        throw ArgumentError("apply_fir: signal shorter than the filter kernel");
    }
    const Eigen::Index half = (k - 1) / 2;
    Eigen::ArrayXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index t = 0; t < k; ++t) {
            acc += taps[t] * signal.samples[mirror_index(i + t - half, n)];
        }
        out[i] = acc;
    }
    return Signal{std::move(out), signal.sample_rate_hz};
}

}  // namespace

FirFilter design_lowpass(double cutoff_hz, double sample_rate_hz, int num_taps) {
    if (num_taps < 3 || num_taps % 2 == 0) {
        throw ArgumentError("design_lowpass: num_taps must be odd and >= 3");
    }
    if (!(sample_rate_hz > 0.0) || !(cutoff_hz > 0.0) || !(cutoff_hz < sample_rate_hz / 2.0)) {
        throw ArgumentError("design_lowpass: cutoff must lie in (0, sample_rate/2)");
    }
    const double fc = cutoff_hz / sample_rate_hz;  // cycles per sample
    const int center = (num_taps - 1) / 2;
    Eigen::VectorXd taps(num_taps);
    // Build one half and mirror it so symmetry is exact in floating point.
    for (int i = 0; i <= center; ++i) {
        const double m = static_cast<double>(i - center);
        const double window =
            0.54 - 0.46 * std::cos(2.0 * M_PI * static_cast<double>(i) / (num_taps - 1));
        const double v = 2.0 * fc * sinc(2.0 * fc * m) * window;
        taps[i] = v;
        taps[num_taps - 1 - i] = v;
    }
    taps /= taps.sum();
    return FirFilter{std::move(taps), fc};
}

Signal apply_fir(const FirFilter& filter, const Signal& signal) {
    return convolve_centered(filter.taps, signal);
}

Signal moving_average(const Signal& signal, int window) {
    if (window < 1 || window % 2 == 0) {
        throw ArgumentError("moving_average: window must be odd and >= 1");
    }
    if (signal.length() < window) {
        throw ArgumentError("moving_average: signal shorter than the window");
    }
    const Eigen::VectorXd taps =
        Eigen::VectorXd::Constant(window, 1.0 / static_cast<double>(window));
    return convolve_centered(taps, signal);
}

Signal clamp_nonnegative(const Signal& signal) {
    return Signal{signal.samples.max(0.0), signal.sample_rate_hz};
}

}  // namespace ppg
