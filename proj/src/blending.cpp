#include "wlc/blending.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wlc::blend {

namespace {
constexpr double degenerate_rel = 1e-12;
}

ComplexSpectrum normalize(const ComplexSpectrum& z, const ComplexSpectrum& T, double floor,
                          spectral::Masked* masked) {
    if (z.size() != T.size()) throw std::invalid_argument("normalize: grids differ");
    ComplexSpectrum out = z;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < z.size(); ++k) {
        const double mag = std::abs(T.values[k]);
        if (!(mag > floor) || mag == 0) {
            out.values[k] = {nan, nan};
            if (masked) masked->bins.push_back(k);
        } else {
            out.values[k] = z.values[k] / T.values[k];
        }
    }
    return out;
}

cd optimal_weight(double S11, double S22, cd S12, cd S21) {
    const cd den = S11 + S22 - S12 - S21;
    if (std::abs(den) <= degenerate_rel * (S11 + S22) || std::abs(den) == 0) return 0.5;
    return (S22 - S21) / den;
}

double blended_psd(cd w, double S11, double S22, cd S12, cd S21) {
    const cd v = std::norm(w) * S11 + std::norm(1.0 - w) * S22 + w * std::conj(1.0 - w) * S12 +
                 (1.0 - w) * std::conj(w) * S21;
    return v.real();
}

BlendSet optimal_blend(const RealSpectrum& S11, const RealSpectrum& S22, const ComplexSpectrum& S12) {
    if (S11.size() != S22.size() || S11.size() != S12.size()) throw std::invalid_argument("optimal_blend: grids differ");
    BlendSet b;
    b.S11 = S11;
    b.S22 = S22;
    b.S12 = S12;
    b.w.freq_hz = b.S_blend.freq_hz = S11.freq_hz;
    b.w.values.resize(S11.size());
    b.S_blend.values.resize(S11.size());
    for (std::size_t k = 0; k < S11.size(); ++k) {
        const double s11 = S11.values[k], s22 = S22.values[k];
        const cd s12 = S12.values[k], s21 = std::conj(s12);
        const cd den = s11 + s22 - s12 - s21;
        if (std::abs(den) <= degenerate_rel * (s11 + s22) || std::abs(den) == 0) b.degenerate.push_back(k);
        const cd w = optimal_weight(s11, s22, s12, s21);
        b.w.values[k] = w;
        // guard against rounding making the minimum slightly negative
        b.S_blend.values[k] = std::max(0.0, blended_psd(w, s11, s22, s12, s21));
    }
    return b;
}

std::vector<double> weight_crossovers(const BlendSet& b) {
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < b.w.size(); ++k) {
        const double a = std::abs(b.w.values[k]) - 0.5, c = std::abs(b.w.values[k + 1]) - 0.5;
        if (a == 0) out.push_back(b.w.freq_hz[k]);
        else if (a * c < 0) {
            const double t = a / (a - c);
            const double f0 = b.w.freq_hz[k], f1 = b.w.freq_hz[k + 1];
            out.push_back(f0 > 0 && f1 > 0 ? f0 * std::pow(f1 / f0, t) : f0 + t * (f1 - f0));
        }
    }
    return out;
}

std::vector<double> psd_crossovers(const RealSpectrum& a, const RealSpectrum& b) {
    if (a.size() != b.size()) throw std::invalid_argument("psd_crossovers: grids differ");
    std::vector<double> out;
    auto diff = [&](std::size_t k) { return std::log(b.values[k]) - std::log(a.values[k]); };
    for (std::size_t k = 0; k + 1 < a.size(); ++k) {
        const double d0 = diff(k), d1 = diff(k + 1);
        if (!std::isfinite(d0) || !std::isfinite(d1)) continue;
        if (d0 == 0) out.push_back(a.freq_hz[k]);
        else if (d0 * d1 < 0) {
            const double t = d0 / (d0 - d1);
            const double f0 = a.freq_hz[k], f1 = a.freq_hz[k + 1];
            out.push_back(f0 > 0 && f1 > 0 ? f0 * std::pow(f1 / f0, t) : f0 + t * (f1 - f0));
        }
    }
    return out;
}

}  // namespace wlc::blend
