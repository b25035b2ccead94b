#include "wlc/ideal_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace wlc::ideal {

namespace {
constexpr cd I{0.0, 1.0};
constexpr double marginal_tol = 1e-12;
}  // namespace

cd denominator(double omega, const EffectiveParams& e) {
    return I * omega * (e.gamma - I * omega) + e.G * e.G - e.omega_s * e.omega_s;
}

IdealIOResult ideal_io(double omega, const EffectiveParams& e) {
    const cd den = denominator(omega, e);
    const double scale = e.omega_s * e.omega_s + e.gamma * std::abs(omega) + omega * omega;
    if (std::abs(den) <= 1e-14 * scale) throw std::domain_error("ideal_io: evaluated at a pole");
    IdealIOResult r;
    r.omega = omega;
    r.t_in_out = (I * omega * (e.gamma + I * omega) - e.G * e.G + e.omega_s * e.omega_s) / den;
    r.v_signal = I * std::sqrt(2.0 * e.gamma) * e.omega_s * e.alpha_sig / den;
    return r;
}

double shot_noise_psd(double omega, const EffectiveParams& e) {
    const double d = e.G * e.G - e.omega_s * e.omega_s + omega * omega;
    return (omega * omega * e.gamma * e.gamma + d * d) /
           (4.0 * e.gamma * e.omega_s * e.omega_s * e.alpha_sig * e.alpha_sig);
}

RealSpectrum ideal_shot_noise_psd(const std::vector<double>& grid, const EffectiveParams& e) {
    RealSpectrum s;
    s.freq_hz.reserve(grid.size());
    s.values.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] <= 0 || (i > 0 && grid[i] <= grid[i - 1]))
            throw std::invalid_argument("ideal_shot_noise_psd: grid must be positive and increasing");
        s.freq_hz.push_back(grid[i] / two_pi);
        s.values.push_back(shot_noise_psd(grid[i], e));
    }
    return s;
}

// Roots of Omega^2 + i gamma Omega + (G^2 - omega_s^2) = 0. The larger root
// comes from the quadratic formula; the other from the product of roots so
// that a near-zero root keeps full relative precision.
PoleSet ideal_poles(const EffectiveParams& e) {
    const double c0 = e.G * e.G - e.omega_s * e.omega_s;
    const cd b = I * e.gamma;
    const cd disc = std::sqrt(b * b - 4.0 * c0);
    const cd q = (std::real(std::conj(b) * disc) >= 0) ? -0.5 * (b + disc) : -0.5 * (b - disc);
    PoleSet ps;
    if (std::abs(q) == 0.0) {
        ps.roots[0] = ps.roots[1] = 0.0;
    } else {
        ps.roots[0] = q;
        ps.roots[1] = c0 / q;
    }
    const double max_im = std::max(ps.roots[0].imag(), ps.roots[1].imag());
    ps.marginal = std::abs(e.G - e.omega_s) <= marginal_tol * std::max(e.G, e.omega_s);
    ps.stable = ps.marginal || max_im <= 0.0;
    return ps;
}

Verdict PoleSet::verdict() const {
    if (marginal) return Verdict::marginal;
    return stable ? Verdict::stable : Verdict::unstable;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::stable: return "stable";
        case Verdict::marginal: return "marginal";
        case Verdict::unstable: return "unstable";
    }
    return "?";
}

}  // namespace wlc::ideal
