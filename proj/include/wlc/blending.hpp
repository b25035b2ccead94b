#pragma once

#include <vector>

#include "wlc/spectral.hpp"
#include "wlc/spectrum.hpp"

// Per-bin combination z = w z_1 + (1 - w) z_2 of two strain-normalized
// readouts, with S_ij = E[n_i conj(n_j)].
namespace wlc::blend {

// z / T; bins with |T| <= floor become NaN and are listed in `masked`.
ComplexSpectrum normalize(const ComplexSpectrum& z, const ComplexSpectrum& T, double floor = 0.0,
                          spectral::Masked* masked = nullptr);

cd optimal_weight(double S11, double S22, cd S12, cd S21);
double blended_psd(cd w, double S11, double S22, cd S12, cd S21);

struct BlendSet {
    ComplexSpectrum w;
    RealSpectrum S_blend;
    RealSpectrum S11, S22;
    ComplexSpectrum S12;
    std::vector<std::size_t> degenerate;  // bins where w fell back to 1/2
};

// S21 is taken as conj(S12).
BlendSet optimal_blend(const RealSpectrum& S11, const RealSpectrum& S22, const ComplexSpectrum& S12);

// Frequencies where |w| crosses 1/2, in ascending order.
std::vector<double> weight_crossovers(const BlendSet& b);
// Frequencies where b - a changes sign (log-interpolated), ascending.
std::vector<double> psd_crossovers(const RealSpectrum& a, const RealSpectrum& b);

}  // namespace wlc::blend
