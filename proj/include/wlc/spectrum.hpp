#pragma once

#include <complex>
#include <string>
#include <vector>

namespace wlc {

using cd = std::complex<double>;

// Estimator bookkeeping carried along with measured spectra.
struct SpectrumMeta {
    std::size_t segment = 0;
    std::size_t overlap = 0;
    std::size_t averages = 0;
    std::string window;
    bool two_sided = false;
};

struct RealSpectrum {
    std::vector<double> freq_hz;
    std::vector<double> values;
    SpectrumMeta meta;
    std::size_t size() const { return freq_hz.size(); }
};

struct ComplexSpectrum {
    std::vector<double> freq_hz;
    std::vector<cd> values;
    SpectrumMeta meta;
    std::size_t size() const { return freq_hz.size(); }
};

}  // namespace wlc
