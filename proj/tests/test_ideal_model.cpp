#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <random>

#include "wlc/freq_domain.hpp"
#include "wlc/ideal_model.hpp"

using namespace wlc;

namespace {

EffectiveParams random_effective(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.1, 10.0);
    EffectiveParams e;
    e.omega_s = 1e4 * u(rng);
    e.G = 1e4 * u(rng);
    e.gamma = 1e4 * u(rng);
    e.alpha_sig = 1e20 * u(rng);
    return e;
}

}  // namespace

TEST_CASE("input-output coefficient is unimodular") {
    std::mt19937_64 rng(7);
    const auto grid = fd::log_grid(0.01, 1e4, 600);
    for (int trial = 0; trial < 20; ++trial) {
        const EffectiveParams e = random_effective(rng);
        for (double w : grid) CHECK(std::abs(std::abs(ideal::ideal_io(w, e).t_in_out) - 1.0) < 1e-12);
    }
}

TEST_CASE("decoupled limit is a single-cavity reflection") {
    EffectiveParams e;
    e.gamma = 3e4;
    e.alpha_sig = 1;
    for (double w : {10.0, 1e3, 1e5}) {
        const cd t = ideal::ideal_io(w, e).t_in_out;
        const cd oracle = (cd(e.gamma, 0) - cd(0, -w)) / (cd(e.gamma, 0) + cd(0, -w));  // (g + i w) / (g - i w)
        CHECK(std::abs(t - oracle) < 1e-12);
    }
}

TEST_CASE("shot-noise PSD is half the inverse squared signal gain") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const EffectiveParams e = random_effective(rng);
        for (double w : fd::log_grid(0.1, 1e5, 50)) {
            const double s = ideal::shot_noise_psd(w, e);
            const double d = e.G * e.G - e.omega_s * e.omega_s + w * w;
            const double lhs = s * 4 * e.gamma * e.omega_s * e.omega_s * e.alpha_sig * e.alpha_sig;
            CHECK(lhs == doctest::Approx(w * w * e.gamma * e.gamma + d * d).epsilon(1e-12));
            const cd v = ideal::ideal_io(w, e).v_signal;
            CHECK(s == doctest::Approx(0.5 / std::norm(v)).epsilon(1e-12));
        }
    }
}

TEST_CASE("PT-symmetric point") {
    EffectiveParams e;
    e.omega_s = e.G = 2.6e4;
    e.gamma = 3.7e4;
    e.alpha_sig = 1e21;
    const auto grid = fd::log_grid(1e-3, 1e4, 200);
    const RealSpectrum s = ideal::ideal_shot_noise_psd(grid, e);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = grid[i];
        const double eq6 = w * w * (w * w + e.gamma * e.gamma) /
                           (4 * e.gamma * e.omega_s * e.omega_s * e.alpha_sig * e.alpha_sig);
        CHECK(s.values[i] == doctest::Approx(eq6).epsilon(1e-12));
        CHECK(s.freq_hz[i] == doctest::Approx(w / (2 * M_PI)).epsilon(1e-15));
    }
    // S ~ Omega^2 towards DC
    const double r = ideal::shot_noise_psd(2e-3, e) / ideal::shot_noise_psd(1e-3, e);
    CHECK(r == doctest::Approx(4.0).epsilon(1e-6));
    // the signal response diverges
    CHECK(std::abs(ideal::ideal_io(1e-6, e).v_signal) > 1e3 * std::abs(ideal::ideal_io(1e-2, e).v_signal));
    CHECK_THROWS_AS(ideal::ideal_io(0.0, e), std::domain_error);
}

TEST_CASE("conventional detector has its dip at omega_s") {
    EffectiveParams e;
    e.omega_s = 2e4;
    e.G = 0;
    e.gamma = 5e3;
    e.alpha_sig = 1;
    for (double w : {1e3, 1.9e4, 2e4, 2.1e4, 5e4}) {
        const double brute = 0.5 / std::norm(ideal::ideal_io(w, e).v_signal);
        CHECK(ideal::shot_noise_psd(w, e) == doctest::Approx(brute).epsilon(1e-12));
    }
    CHECK(ideal::shot_noise_psd(2e4, e) < ideal::shot_noise_psd(1.9e4, e));
    CHECK(ideal::shot_noise_psd(2e4, e) < ideal::shot_noise_psd(2.1e4, e));
}

TEST_CASE("grid validation") {
    EffectiveParams e;
    e.omega_s = e.G = e.gamma = e.alpha_sig = 1;
    CHECK_THROWS_AS(ideal::ideal_shot_noise_psd({1.0, 1.0}, e), std::invalid_argument);
    CHECK_THROWS_AS(ideal::ideal_shot_noise_psd({-1.0, 1.0}, e), std::invalid_argument);
}

TEST_CASE("poles agree with a companion-matrix eigen solve") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        const EffectiveParams e = random_effective(rng);
        const ideal::PoleSet ps = ideal::ideal_poles(e);
        // Omega^2 + i gamma Omega + (G^2 - w_s^2)
        Eigen::Matrix2cd comp;
        comp << cd(0, -e.gamma), -(e.G * e.G - e.omega_s * e.omega_s), 1.0, 0.0;
        const Eigen::Vector2cd ev = Eigen::ComplexEigenSolver<Eigen::Matrix2cd>(comp).eigenvalues();
        const double scale = std::max(std::abs(ev(0)), std::abs(ev(1)));
        const bool direct = std::abs(ps.roots[0] - ev(0)) <= 1e-10 * scale && std::abs(ps.roots[1] - ev(1)) <= 1e-10 * scale;
        const bool swapped = std::abs(ps.roots[0] - ev(1)) <= 1e-10 * scale && std::abs(ps.roots[1] - ev(0)) <= 1e-10 * scale;
        CHECK((direct || swapped));
        for (const cd& r : ps.roots) {
            const cd res = r * r + cd(0, e.gamma) * r + (e.G * e.G - e.omega_s * e.omega_s);
            CHECK(std::abs(res) <= 1e-9 * scale * scale);
        }
        const double max_im = std::max(ev(0).imag(), ev(1).imag());
        CHECK(ps.stable == (max_im <= 1e-9 * scale));
        CHECK(ps.stable == (e.G <= e.omega_s));
    }
}

TEST_CASE("stability boundary at G = omega_s") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        EffectiveParams e = random_effective(rng);
        e.G = e.omega_s * (1 - 1e-3);
        CHECK(ideal::ideal_poles(e).verdict() == ideal::Verdict::stable);
        e.G = e.omega_s * (1 + 1e-3);
        CHECK(ideal::ideal_poles(e).verdict() == ideal::Verdict::unstable);
        e.G = e.omega_s;
        const ideal::PoleSet ps = ideal::ideal_poles(e);
        CHECK(ps.verdict() == ideal::Verdict::marginal);
        CHECK(ps.stable);
        CHECK(std::min(std::abs(ps.roots[0]), std::abs(ps.roots[1])) < 1e-9 * e.gamma);
    }
    EffectiveParams e;
    e.omega_s = 26498.16;
    e.G = 1.01 * e.omega_s;
    e.gamma = 37474.06;
    const ideal::PoleSet ps = ideal::ideal_poles(e);
    CHECK_FALSE(ps.stable);
    // the growing root is purely imaginary here: i (sqrt(g^2 + 4 d) - g) / 2
    const double d = e.G * e.G - e.omega_s * e.omega_s;
    const double grow = 0.5 * (std::sqrt(e.gamma * e.gamma + 4 * d) - e.gamma);
    CHECK(std::max(ps.roots[0].imag(), ps.roots[1].imag()) == doctest::Approx(grow).epsilon(1e-10));
}
