#include "wlc/freq_domain.hpp"

#include <boost/math/tools/roots.hpp>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wlc::fd {

namespace {

constexpr cd I{0.0, 1.0};

// Unknown layout: per sideband s (0: Omega, 1: conjugate partner) seven
// fields starting at 7*s, then the scaled displacement y = |kick| x.
enum Field { a1 = 0, a2, b1, b2, b3, b4, bo };
constexpr int Y = 14;

int at(int s, Field f) { return 7 * s + f; }

}  // namespace

EffectiveParams pumped(const PhysicalParams& p, Pump mode) {
    EffectiveParams e = params::derive_effective(p);
    switch (mode) {
        case Pump::uncompensated: e.omega_m = p.omega_m0; break;
        case Pump::analytic: break;
        case Pump::compensated: e.omega_m = compensate_spring(p); break;
    }
    return e;
}

Solution solve_network(cd omega, const PhysicalParams& p, double omega_p, Topology topo) {
    using Mat = Eigen::Matrix<cd, 15, 15>;
    Mat A = Mat::Zero();
    Eigen::Matrix<cd, 15, 5> B = Eigen::Matrix<cd, 15, 5>::Zero();

    const double sT = std::sqrt(p.T_ITM), sR = std::sqrt(p.R_ITM());
    const double sTs = std::sqrt(p.T_SRM), sRs = std::sqrt(p.R_SRM());
    const cd partner = 2.0 * omega_p - omega;
    const cd nu = omega - omega_p;
    const double ts = p.tau_SRC(), ta = p.tau_arm();

    // The oscillator kicks the field by 2i k_b A_b x (opposite signs for the
    // two propagation directions) and feels F = kap (e^{i w_p t} B + h.c.).
    const double kick_mag = 2.0 * (p.omega_0() + omega_p) / p.c * p.A_b();
    const double kap = 2.0 * hbar * p.omega_0() / p.c * 2.0 * p.A_b();
    const cd h_drive = 2.0 * I * p.k_0() * p.A_arm() * p.L_arm;

    const cd e_s[2] = {std::exp(I * omega * ts / 2.0), std::exp(-I * partner * ts / 2.0)};
    const cd e_a[2] = {std::exp(I * omega * ta), std::exp(-I * partner * ta)};
    const cd kick_dir[2] = {I, -I};

    for (int s = 0; s < 2; ++s) {
        int r = 7 * s;
        switch (topo) {
            case Topology::closed:
                A(r, at(s, a1)) = 1; A(r, at(s, b3)) = -sT; A(r, at(s, a2)) = -sR; ++r;
                A(r, at(s, a2)) = 1; A(r, at(s, a1)) = -e_a[s];
                if (s == 0) B(r, 2) = h_drive;
                ++r;
                A(r, at(s, b4)) = 1; A(r, at(s, a2)) = -sT; A(r, at(s, b3)) = sR; ++r;
                break;
            case Topology::arm_cut:
                A(r, at(s, a1)) = 1; A(r, at(s, b3)) = -sT; A(r, at(s, a2)) = -sR; ++r;
                A(r, at(s, a2)) = 1; B(r, 3 + s) = 1; ++r;
                A(r, at(s, b4)) = 1; A(r, at(s, a2)) = -sT; A(r, at(s, b3)) = sR; ++r;
                break;
            case Topology::itm_cut:
                A(r, at(s, a1)) = 1; ++r;
                A(r, at(s, a2)) = 1; ++r;
                A(r, at(s, b4)) = 1; B(r, 3 + s) = 1; ++r;
                break;
        }
        A(r, at(s, b2)) = 1; A(r, at(s, b4)) = -e_s[s]; A(r, Y) = -kick_dir[s]; ++r;
        A(r, at(s, b3)) = 1; A(r, at(s, b1)) = -e_s[s]; A(r, Y) = kick_dir[s]; ++r;
        A(r, at(s, b1)) = 1; A(r, at(s, b2)) = sRs; B(r, s) = sTs; ++r;
        A(r, at(s, bo)) = 1; A(r, at(s, b2)) = -sTs; B(r, s) = sRs; ++r;
    }

    if (p.P_b > 0) {
        const cd chi = p.m * (p.omega_m0 * p.omega_m0 - nu * nu - I * p.gamma_m() * nu);
        A(Y, Y) = chi / (kick_mag * kap);
        for (int s = 0; s < 2; ++s) {
            A(Y, at(s, b4)) = -e_s[s];
            A(Y, at(s, b1)) = e_s[s];
        }
    } else {
        A(Y, Y) = 1;
    }

    Eigen::PartialPivLU<Mat> lu(A);
    if (!(lu.rcond() > 1e-14)) throw std::runtime_error("solve_network: singular system (undamped pole on the grid)");
    return {lu.solve(B), lu.determinant(), A(Y, Y)};
}

FilterScattering filter_scattering(double omega_tilde, const PhysicalParams& p, const EffectiveParams& e) {
    const Solution sol = solve_network(e.omega_m + omega_tilde, p, e.omega_m, Topology::arm_cut);
    const int rows[4] = {at(0, bo), at(1, bo), at(0, a1), at(1, a1)};
    const int cols[4] = {0, 1, 3, 4};
    FilterScattering f;
    f.omega_tilde = omega_tilde;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) f.M(i, j) = sol.X(rows[i], cols[j]);
    return f;
}

ChannelMatrices channel_matrices(double omega, const PhysicalParams& p, const EffectiveParams& e) {
    const Matrix4c Mm = filter_scattering(-e.omega_m + omega, p, e).M;
    const Matrix4c Mp = filter_scattering(e.omega_m + omega, p, e).M;
    // One-based (row, col) picks into M- and M+, laid out as printed.
    auto build = [&](int r1, int r2, int c1, int c2) {
        Matrix4c R = Matrix4c::Zero();
        R(0, 0) = Mm(r1 - 1, c1 - 1);
        R(0, 3) = Mm(r1 - 1, c2 - 1);
        R(1, 1) = Mp(r2 - 1, c2 - 1);
        R(1, 2) = Mp(r2 - 1, c1 - 1);
        R(2, 1) = Mp(r1 - 1, c2 - 1);
        R(2, 2) = Mp(r1 - 1, c1 - 1);
        R(3, 0) = Mm(r2 - 1, c1 - 1);
        R(3, 3) = Mm(r2 - 1, c2 - 1);
        return R;
    };
    ChannelMatrices cm;
    cm.R_aa = build(3, 4, 3, 4);
    cm.T_ab = build(3, 4, 1, 2);
    cm.R_bb = build(1, 2, 1, 2);
    cm.T_ba = build(1, 2, 3, 4);
    return cm;
}

double compensate_spring(const PhysicalParams& p, double tol) {
    params::validate(p);
    if (p.P_b == 0) return p.omega_m0;
    constexpr double omega_probe = 1e-6;
    auto phase = [&](double wp) {
        EffectiveParams e = params::derive_effective(p);
        e.omega_m = wp;
        return std::arg(filter_scattering(-wp + omega_probe, p, e).M(2, 2));
    };
    const double lo = p.omega_m0;
    const double hi = p.omega_m0 + 10.0 * params::optical_spring_shift(p);
    constexpr int n_scan = 200;
    double x0 = lo, f0 = phase(lo);
    for (int k = 1; k <= n_scan; ++k) {
        const double x1 = lo + (hi - lo) * k / n_scan;
        const double f1 = phase(x1);
        if (f0 * f1 <= 0 && std::abs(f0) < pi / 2 && std::abs(f1) < pi / 2) {
            if (f1 == 0) return x1;
            std::uintmax_t iters = 200;
            auto tol_fn = [tol](double a, double b) { return std::abs(b - a) <= tol; };
            auto [a, b] = boost::math::tools::toms748_solve(phase, x0, x1, f0, f1, tol_fn, iters);
            return 0.5 * (a + b);
        }
        x0 = x1;
        f0 = f1;
    }
    throw std::runtime_error("compensate_spring: no phase root in [omega_m0, omega_m0 + 10 x analytic shift]");
}

ClosedLoopIO closed_loop_io(double omega, const PhysicalParams& p, const EffectiveParams& e) {
    const ChannelMatrices cm = channel_matrices(omega, p, e);
    // The signal pair [X(O), X^dag(2w_m - O)] sits at indices 0 and 3.
    auto block = [](const Matrix4c& m) {
        Matrix2c b;
        b << m(0, 0), m(0, 3), m(3, 0), m(3, 3);
        return b;
    };
    const Matrix2c R = block(cm.R_aa), Tab = block(cm.T_ab), Rbb = block(cm.R_bb), Tba = block(cm.T_ba);
    const double ta = p.tau_arm();
    Matrix2c D = Matrix2c::Zero();
    D(0, 0) = std::exp(I * omega * ta);
    D(1, 1) = std::exp(-I * (2.0 * e.omega_m - omega) * ta);
    const Vector2c d(2.0 * I * p.k_0() * p.A_arm() * p.L_arm, 0.0);
    const Eigen::PartialPivLU<Matrix2c> loop(Matrix2c::Identity() - D * R);
    ClosedLoopIO out;
    out.M = Rbb + Tba * loop.solve(D * Tab);
    out.v = Tba * loop.solve(d);
    return out;
}

ClosedLoopIO closed_loop_direct(double omega, const PhysicalParams& p, const EffectiveParams& e) {
    const Solution sol = solve_network(omega, p, e.omega_m, Topology::closed);
    ClosedLoopIO out;
    out.M << sol.X(at(0, bo), 0), sol.X(at(0, bo), 1), sol.X(at(1, bo), 0), sol.X(at(1, bo), 1);
    out.v << sol.X(at(0, bo), 2), sol.X(at(1, bo), 2);
    return out;
}

ChannelPSDs channel_psds(const std::vector<double>& grid, const PhysicalParams& p, const EffectiveParams& e) {
    ChannelPSDs out;
    for (double w : grid) {
        const ClosedLoopIO io = closed_loop_io(w, p, e);
        const double f = w / two_pi;
        const double n0 = std::norm(io.M(0, 0)) + std::norm(io.M(0, 1));
        const double n1 = std::norm(io.M(1, 0)) + std::norm(io.M(1, 1));
        const cd c01 = io.M(0, 0) * std::conj(io.M(1, 0)) + io.M(0, 1) * std::conj(io.M(1, 1));
        out.signal.freq_hz.push_back(f);
        out.signal.values.push_back(vacuum_level * n0 / std::norm(io.v(0)));
        out.idler.freq_hz.push_back(f);
        out.idler.values.push_back(vacuum_level * n1 / std::norm(io.v(1)));
        out.cross.freq_hz.push_back(f);
        out.cross.values.push_back(vacuum_level * c01 / (io.v(0) * std::conj(io.v(1))));
    }
    return out;
}

std::vector<double> log_grid(double f_lo_hz, double f_hi_hz, std::size_t n, double jitter) {
    if (n < 2 || f_lo_hz <= 0 || f_hi_hz <= f_lo_hz) throw std::invalid_argument("log_grid: bad range");
    std::vector<double> g(n);
    const double ratio = std::log(f_hi_hz / f_lo_hz);
    // keep the jitter well inside one grid step so the grid stays increasing
    jitter = std::min(jitter, 0.25 * ratio / static_cast<double>(n - 1));
    for (std::size_t i = 0; i < n; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(n - 1);
        // deterministic low-discrepancy offset in [-0.5, 0.5)
        const double frac = std::fmod(0.6180339887498949 * static_cast<double>(i + 1), 1.0) - 0.5;
        const double j = (i == 0 || i + 1 == n) ? 0.0 : jitter * frac;
        g[i] = two_pi * f_lo_hz * std::exp(ratio * u) * (1.0 + j);
    }
    return g;
}

}  // namespace wlc::fd
