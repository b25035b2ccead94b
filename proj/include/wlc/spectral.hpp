#pragma once

#include <vector>

#include "wlc/spectrum.hpp"

// Averaged-periodogram estimators (Hann window, 50% overlap by default).
// Forward transforms use e^{-2 pi i f t}; for complex envelopes a component
// e^{-i Omega t} therefore shows up at f = -Omega / (2 pi).
namespace wlc::spectral {

struct WelchOptions {
    std::size_t segment = 1u << 14;
    double overlap = 0.5;
};

// Real input: single-sided PSD on [0, fs/2]; integrates to the mean square.
RealSpectrum welch_psd(const std::vector<double>& x, double fs, const WelchOptions& opt = {});
// Complex input: two-sided PSD on [-fs/2, fs/2), ascending.
RealSpectrum welch_psd(const std::vector<cd>& x, double fs, const WelchOptions& opt = {});

// E[conj(X) Y], same layout as welch_psd for the respective input type.
ComplexSpectrum welch_csd(const std::vector<double>& x, const std::vector<double>& y, double fs,
                          const WelchOptions& opt = {});
ComplexSpectrum welch_csd(const std::vector<cd>& x, const std::vector<cd>& y, double fs,
                          const WelchOptions& opt = {});

struct Masked {
    std::vector<std::size_t> bins;  // indices whose value was set to NaN
};

// T = S_hb / S_hh with b the response to the injected h. Bins where S_hh is
// below `floor` times its median are masked.
ComplexSpectrum estimate_tf(const std::vector<cd>& h, const std::vector<cd>& b, double fs,
                            const WelchOptions& opt = {}, double floor = 1e-12, Masked* masked = nullptr);

// S_bb / |T|^2 on a common grid. Bins with |T| < floor become NaN.
RealSpectrum strain_refer(const RealSpectrum& S_bb, const ComplexSpectrum& T, double floor = 0.0,
                          Masked* masked = nullptr);

// Index of the bin nearest to f.
std::size_t nearest_bin(const std::vector<double>& freq_hz, double f);

}  // namespace wlc::spectral
