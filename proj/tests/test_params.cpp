#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "wlc/params.hpp"

using namespace wlc;

namespace {
// Table I, entered independently of the library defaults.
constexpr double c0 = 299792458.0;
constexpr double L_arm = 4000, L_SRC = 40, T_ITM = 0.005, T_SRM = 0.02, P_b = 6400, lam = 1064e-9, m = 1e-5;
const double omega_m0 = 2 * M_PI * 1e5;
}  // namespace

TEST_CASE("derived effective parameters follow the closed forms") {
    const PhysicalParams p;
    const EffectiveParams e = params::derive_effective(p);
    const double ws = c0 * std::sqrt(T_ITM) / (2 * std::sqrt(L_arm * L_SRC));
    const double G = std::sqrt(8 * M_PI * P_b / (m * lam * omega_m0 * L_SRC));
    CHECK(e.omega_s == doctest::Approx(ws).epsilon(1e-12));
    CHECK(e.G == doctest::Approx(G).epsilon(1e-12));
    CHECK(e.gamma == doctest::Approx(c0 * T_SRM / (4 * L_SRC)).epsilon(1e-12));
    // hand-evaluated values
    CHECK(e.omega_s == doctest::Approx(26498.16).epsilon(1e-6));
    CHECK(e.G == doctest::Approx(24525.57).epsilon(1e-6));
    CHECK(e.gamma == doctest::Approx(37474.057).epsilon(1e-7));
    // the nominal point sits below G = omega_s
    CHECK(e.G / e.omega_s == doctest::Approx(0.92556).epsilon(1e-4));
    CHECK(e.gamma_m == 0.0);
    CHECK(e.omega_m >= p.omega_m0);
}

TEST_CASE("effective parameter scalings") {
    PhysicalParams p;
    const EffectiveParams e = params::derive_effective(p);

    PhysicalParams q = p;
    q.T_ITM = 4 * p.T_ITM;
    CHECK(params::derive_effective(q).omega_s == doctest::Approx(2 * e.omega_s).epsilon(1e-12));

    q = p;
    q.P_b = 0;
    CHECK(params::derive_effective(q).G == 0.0);

    for (double s : {0.5, 3.0, 10.0}) {
        q = p;
        q.L_arm *= s;
        q.L_SRC *= s;
        CHECK(params::derive_effective(q).omega_s == doctest::Approx(e.omega_s / s).epsilon(1e-12));
    }
    CHECK(e.gamma * p.tau_SRC() == doctest::Approx(p.T_SRM / 2).epsilon(1e-14));

    q = p;
    q.Q_m = 5000;
    CHECK(params::derive_effective(q).gamma_m == doctest::Approx(omega_m0 / 5000).epsilon(1e-14));
}

TEST_CASE("optical spring shift") {
    PhysicalParams p;
    const EffectiveParams e = params::derive_effective(p);
    const double shift = params::optical_spring_shift(p);
    // with tau_b = L_SRC/(4c) the shift equals G^2 / (2 w_m0)
    CHECK(shift == doctest::Approx(e.G * e.G / (2 * omega_m0)).epsilon(1e-12));
    CHECK(shift / (2 * M_PI) == doctest::Approx(76.18).epsilon(1e-3));
    // the round-trip reading of tau_b is 8x longer
    CHECK(params::optical_spring_shift(p, p.tau_SRC()) == doctest::Approx(shift / 8).epsilon(1e-12));

    PhysicalParams q = p;
    q.P_b = 0;
    CHECK(params::optical_spring_shift(q) == 0.0);
    q = p;
    q.m = 2 * p.m;
    CHECK(params::optical_spring_shift(q) == doctest::Approx(shift / 2).epsilon(1e-12));
    CHECK(params::optical_spring_shift(p) >= 0.0);
}

TEST_CASE("phase matching ratio") {
    PhysicalParams p;
    const double r = params::phase_matching_ratio(p);
    const double wm = params::derive_effective(p).omega_m;
    const double hbar_free = 4 * (2 * M_PI * c0 / lam) * P_b / (m * wm * c0 * c0 * T_ITM) / (c0 / L_arm);
    CHECK(r == doctest::Approx(hbar_free).epsilon(1e-12));
    CHECK(r == doctest::Approx(0.2140).epsilon(1e-3));

    PhysicalParams q = p;
    q.L_arm = 2 * p.L_arm;
    CHECK(params::phase_matching_ratio(q) == doctest::Approx(2 * r).epsilon(1e-12));
    q = p;
    q.P_b = 2 * p.P_b;
    // w_m moves with P_b through the spring shift, by < 0.1%
    CHECK(params::phase_matching_ratio(q) == doctest::Approx(2 * r).epsilon(1e-3));
}

TEST_CASE("with_g_ratio rescales the pump power") {
    for (double ratio : {0.0, 0.5, 0.99, 1.0, 1.01, 2.0}) {
        const PhysicalParams q = params::with_g_ratio(PhysicalParams{}, ratio);
        const EffectiveParams e = params::derive_effective(q);
        CHECK(e.G == doctest::Approx(ratio * e.omega_s).epsilon(1e-13));
    }
}

TEST_CASE("validation rejects unphysical parameters") {
    PhysicalParams p;
    CHECK_NOTHROW(params::validate(p));
    p.T_ITM = 1.0;
    CHECK_THROWS_AS(params::validate(p), std::domain_error);
    p = {};
    p.m = -1;
    CHECK_THROWS_AS(params::derive_effective(p), std::domain_error);
    p = {};
    p.L_SRC = 0;
    CHECK_THROWS_AS(params::validate(p), std::domain_error);
    p = {};
    p.P_b = 0;
    CHECK_NOTHROW(params::validate(p));
}

TEST_CASE("config parsing") {
    const PhysicalParams p = params::parse_config(
        "# comment\n"
        "L_arm = 3000   # trailing\n"
        "\n"
        "Q_m = inf\n"
        "P_b=1000\n");
    CHECK(p.L_arm == 3000);
    CHECK(p.P_b == 1000);
    CHECK_FALSE(p.Q_m.has_value());
    CHECK(p.gamma_m() == 0.0);

    CHECK(params::parse_config("Q_m = 5000\n").Q_m.value() == 5000);
    CHECK_THROWS_AS(params::parse_config("L_armm = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(params::parse_config("L_arm 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(params::parse_config("L_arm = abc\n"), std::invalid_argument);
    CHECK_THROWS(params::parse_config("T_SRM = 2\n"));
}

TEST_CASE("config round trip") {
    PhysicalParams p;
    p.L_arm = 3999.5;
    p.Q_m = 1234.5;
    p.lambda = 1.55e-6;
    const PhysicalParams q = params::parse_config(params::serialize_config(p));
    CHECK(params::serialize_config(q) == params::serialize_config(p));
    CHECK(q.L_arm == p.L_arm);
    CHECK(q.Q_m == p.Q_m);
    CHECK(q.lambda == p.lambda);

    PhysicalParams u;
    CHECK_FALSE(params::parse_config(params::serialize_config(u)).Q_m.has_value());
}
