#pragma once

#include <Eigen/Dense>

#include "ppg/signal.hpp"

namespace ppg {

// Linear-phase FIR low-pass filter. Taps are symmetric and sum to one, so DC
// passes unchanged.
struct FirFilter {
    Eigen::VectorXd taps;
    double normalized_cutoff = 0.0;  // cutoff_hz / sample_rate_hz, in (0, 0.5)
};

// Windowed-sinc (Hamming) design; num_taps must be odd and >= 3, the cutoff
// strictly inside (0, Nyquist).
FirFilter design_lowpass(double cutoff_hz, double sample_rate_hz, int num_taps);

// Same-length filtering with edge-mirrored padding; the (num_taps-1)/2 group
// delay is compensated so output stays phase-aligned with the input.
Signal apply_fir(const FirFilter& filter, const Signal& signal);

// Mean filter over an odd window, same padding rule as apply_fir.
Signal moving_average(const Signal& signal, int window);

// out_i = max(in_i, 0); applied to every generated signal before it reaches
// the classifier.
Signal clamp_nonnegative(const Signal& signal);

}  // namespace ppg
