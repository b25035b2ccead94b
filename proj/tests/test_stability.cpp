#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <random>

#include "wlc/stability.hpp"

using namespace wlc;
using stability::Method;
using stability::NyquistContour;

namespace {

constexpr cd I{0.0, 1.0};

NyquistContour contour_for(double g_ratio, fd::Pump pump = fd::Pump::compensated) {
    PhysicalParams p;
    if (g_ratio >= 0) p = params::with_g_ratio(p, g_ratio);
    return stability::nyquist(p, fd::pumped(p, pump));
}

}  // namespace

TEST_CASE("arm reflection is all-pass") {
    const PhysicalParams p;
    for (double w : {-1e5, -3.0, 0.0, 17.0, 2e3, 6e5}) CHECK(std::abs(std::abs(stability::cavity_reflection(w, p)) - 1) < 1e-12);
    // and decays into the upper half plane
    CHECK(std::abs(stability::cavity_reflection(cd(100, 50), p)) < 1.0);
}

TEST_CASE("pump-off filter is the bare SRC round trip") {
    PhysicalParams p;
    p.P_b = 0;
    const EffectiveParams e = fd::pumped(p, fd::Pump::compensated);
    const double sRs = std::sqrt(1 - p.T_SRM);
    for (cd w : {cd(10, 1), cd(-4e3, 1), cd(2e5, 3)}) {
        const fd::Matrix2c m = stability::optomechanical_matrix_numeric(w, p, e);
        CHECK(std::abs(m(0, 0) - sRs * std::exp(I * w * p.tau_SRC())) < 1e-12);
        CHECK(std::abs(m(1, 1) - sRs * std::exp(-I * (2.0 * e.omega_m - w) * p.tau_SRC())) < 1e-12);
        CHECK(std::abs(m(0, 1)) == 0.0);
        CHECK(std::abs(m(1, 0)) == 0.0);
    }
}

TEST_CASE("characteristic is normalized") {
    const PhysicalParams p;
    const EffectiveParams e = fd::pumped(p, fd::Pump::compensated);
    EffectiveParams passive = e;
    passive.G = 0;
    CHECK(std::abs(stability::characteristic(cd(300, 1), p, passive, Method::analytic) - 1.0) < 1e-12);
    // far from the mechanical features the pump barely matters
    const cd far = stability::characteristic(cd(3.5 * e.omega_m, 1), p, e, Method::numeric);
    CHECK(std::abs(far) == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("pump-off network is stable") {
    PhysicalParams p;
    p.P_b = 0;
    const NyquistContour c = stability::nyquist(p, fd::pumped(p, fd::Pump::compensated));
    CHECK(c.winding == 0);
    CHECK(c.verdict == ideal::Verdict::stable);
}

TEST_CASE("verdicts for the nominal family") {
    const NyquistContour unc = contour_for(-1, fd::Pump::uncompensated);
    CHECK(unc.winding == 2);
    CHECK(unc.verdict == ideal::Verdict::unstable);

    const NyquistContour comp = contour_for(-1);
    CHECK(comp.winding == 0);
    CHECK(comp.verdict == ideal::Verdict::stable);
    // the contour is resolved: every step turns by at most the allowed phase
    for (std::size_t i = 0; i + 1 < comp.samples.size(); ++i)
        CHECK(std::abs(std::arg(comp.samples[i + 1].z / comp.samples[i].z)) <= stability::NyquistOptions{}.max_phase_step);
    CHECK(std::abs(comp.winding_raw - comp.winding) < 1e-6);

    CHECK(contour_for(0.99).verdict == ideal::Verdict::stable);
    CHECK(contour_for(1.01).verdict == ideal::Verdict::unstable);
    const NyquistContour pt = contour_for(1.0);
    CHECK(pt.winding == 0);
    CHECK(pt.verdict == ideal::Verdict::marginal);
}

TEST_CASE("uncompensated pole sits where the contour says") {
    const PhysicalParams p;
    const EffectiveParams e = fd::pumped(p, fd::Pump::uncompensated);
    // secant on the characteristic from a rough starting point
    cd x0(-2000, 800), x1(-2100, 900);
    cd f0 = stability::characteristic(x0, p, e, Method::numeric);
    cd f1 = stability::characteristic(x1, p, e, Method::numeric);
    for (int k = 0; k < 60 && std::abs(x1 - x0) > 1e-9; ++k) {
        const cd x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = stability::characteristic(x1, p, e, Method::numeric);
    }
    CHECK(x1.imag() > 0);
    CHECK(std::abs(f1) < 1e-9);
    CHECK(x1.real() == doctest::Approx(-2070.12).epsilon(1e-4));
    CHECK(x1.imag() == doctest::Approx(890.68).epsilon(1e-4));
}

TEST_CASE("single-mode limit agrees with the ideal poles") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> t_itm(0.003, 0.01), below(0.5, 0.95), above(1.05, 1.5);
    for (int k = 0; k < 20; ++k) {
        PhysicalParams p;
        p.L_SRC /= 10;
        p.T_SRM /= 10;
        p.omega_m0 *= 10;
        p.T_ITM = t_itm(rng);
        const double ratio = k % 2 ? below(rng) : above(rng);
        p = params::with_g_ratio(p, ratio);
        const EffectiveParams e = fd::pumped(p, fd::Pump::compensated);
        const ideal::Verdict expect = ideal::ideal_poles(e).verdict();
        CAPTURE(ratio);
        CAPTURE(p.T_ITM);
        CHECK(stability::nyquist(p, e).verdict == expect);
    }
}

TEST_CASE("contour options are validated") {
    const PhysicalParams p;
    stability::NyquistOptions opt;
    opt.epsilon = 0;
    CHECK_THROWS_AS(stability::nyquist(p, fd::pumped(p, fd::Pump::analytic), opt), std::invalid_argument);
}
