#include "wlc/stability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wlc::stability {

namespace {

constexpr cd I{0.0, 1.0};

cd all_pass(cd phase_factor, double r) { return (phase_factor - r) / (1.0 - r * phase_factor); }

Matrix2c numeric_filter(cd omega, const PhysicalParams& p, double omega_p, cd* mech_char) {
    const fd::Solution sol = fd::solve_network(omega, p, omega_p, fd::Topology::itm_cut);
    // b_3 of the two sidebands sits at unknowns 4 and 11; the b_4 port at columns 3, 4
    Matrix2c m;
    m << sol.X(4, 3), sol.X(4, 4), sol.X(11, 3), sol.X(11, 4);
    if (mech_char) *mech_char = sol.det / sol.mech_diag;
    return m;
}

}  // namespace

cd cavity_reflection(cd omega, const PhysicalParams& p) {
    return all_pass(std::exp(I * omega * p.tau_arm()), std::sqrt(p.R_ITM()));
}

Matrix2c cavity_matrix(cd omega, const PhysicalParams& p, const EffectiveParams& e) {
    const cd partner = 2.0 * e.omega_m - omega;
    Matrix2c m = Matrix2c::Zero();
    m(0, 0) = cavity_reflection(omega, p);
    // conjugate of the reflection at the partner, continued off the real axis
    m(1, 1) = all_pass(std::exp(-I * partner * p.tau_arm()), std::sqrt(p.R_ITM()));
    return m;
}

Matrix2c optomechanical_matrix(cd omega, const PhysicalParams& p, const EffectiveParams& e) {
    const double rs = std::sqrt(p.R_SRM());
    const double g = e.G;
    const cd den = omega * (omega - 2.0 * e.omega_m) + I * e.gamma_m * (omega - e.omega_m);
    const cd T = -rs + I * (1.0 + rs) * (1.0 + rs) * g * g * p.tau_SRC() * p.omega_m0 / (2.0 * den);
    Matrix2c m;
    m << T, T + rs, -rs - T, -2.0 * rs - T;
    return std::exp(I * omega * p.tau_SRC() / 2.0) * m;
}

Matrix2c open_loop(cd omega, const PhysicalParams& p, const EffectiveParams& e) {
    return optomechanical_matrix(omega, p, e) * cavity_matrix(omega, p, e);
}

Matrix2c optomechanical_matrix_numeric(cd omega, const PhysicalParams& p, const EffectiveParams& e) {
    return -numeric_filter(omega, p, e.omega_m, nullptr);
}

Matrix2c open_loop_numeric(cd omega, const PhysicalParams& p, const EffectiveParams& e) {
    return optomechanical_matrix_numeric(omega, p, e) * cavity_matrix(omega, p, e);
}

cd characteristic(cd omega, const PhysicalParams& p, const EffectiveParams& e, Method method) {
    const Matrix2c cav = cavity_matrix(omega, p, e);
    const Matrix2c id = Matrix2c::Identity();
    if (method == Method::analytic) {
        EffectiveParams passive = e;
        passive.G = 0;
        const cd num = (id + optomechanical_matrix(omega, p, e) * cav).determinant();
        const cd den = (id + optomechanical_matrix(omega, p, passive) * cav).determinant();
        return num / den;
    }
    cd mech = 1.0;
    const Matrix2c filt = numeric_filter(omega, p, e.omega_m, &mech);
    PhysicalParams off = p;
    off.P_b = 0;
    const Matrix2c filt0 = numeric_filter(omega, off, e.omega_m, nullptr);
    const cd num = (id - filt * cav).determinant();
    const cd den = (id - filt0 * cav).determinant();
    return num * mech / den;
}

NyquistContour nyquist(const PhysicalParams& p, const EffectiveParams& e, const NyquistOptions& opt) {
    if (opt.epsilon <= 0) throw std::invalid_argument("nyquist: contour offset must be positive");
    const double W = opt.omega_max_factor * e.omega_m;
    const std::size_t n0 = std::max<std::size_t>(opt.base_points, 3);

    std::vector<double> xs;
    xs.reserve(n0 + 8000);
    for (std::size_t i = 0; i < n0; ++i) xs.push_back(-W + 2.0 * W * static_cast<double>(i) / static_cast<double>(n0 - 1));
    // Narrow features sit near Omega = 0 and its partner 2 w_m.
    for (double centre : {0.0, 2.0 * e.omega_m}) {
        constexpr int k = 2000;
        for (int i = 0; i < k; ++i) {
            const double off = 1e-3 * std::sinh(-20.0 + 40.0 * i / (k - 1));
            const double x = centre + off;
            if (x > -W && x < W) xs.push_back(x);
        }
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    auto eval = [&](double x) { return characteristic(cd(x, opt.epsilon), p, e, opt.method); };

    std::vector<NyquistSample> s;
    s.reserve(xs.size());
    for (double x : xs) s.push_back({x, eval(x)});

    const double min_dx = 1e-10 * W;
    bool converged = false;
    for (int pass = 0; pass < opt.max_refine_passes; ++pass) {
        std::vector<NyquistSample> next;
        next.reserve(s.size() + s.size() / 4);
        bool inserted = false, stuck = false;
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
            next.push_back(s[i]);
            const double step = std::abs(std::arg(s[i + 1].z / s[i].z));
            if (step > opt.max_phase_step) {
                const double mid = 0.5 * (s[i].omega + s[i + 1].omega);
                if (s[i + 1].omega - s[i].omega < min_dx) {
                    stuck = true;
                    continue;
                }
                next.push_back({mid, eval(mid)});
                inserted = true;
            }
        }
        next.push_back(s.back());
        s.swap(next);
        if (stuck) throw std::runtime_error("nyquist: refinement failed to resolve the contour phase");
        if (!inserted) {
            converged = true;
            break;
        }
    }
    if (!converged) throw std::runtime_error("nyquist: refinement did not converge");

    NyquistContour out;
    double acc = 0;
    out.min_abs = std::abs(s.front().z);
    out.omega_at_min = s.front().omega;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        acc += std::arg(s[i + 1].z / s[i].z);
        if (std::abs(s[i + 1].z) < out.min_abs) {
            out.min_abs = std::abs(s[i + 1].z);
            out.omega_at_min = s[i + 1].omega;
        }
    }
    // close through the far arc, where the characteristic is ~1
    out.closure_step = std::arg(s.front().z / s.back().z);
    acc += out.closure_step;
    out.winding_raw = acc / two_pi;
    out.winding = static_cast<int>(std::lround(out.winding_raw));
    if (out.winding != 0) out.verdict = ideal::Verdict::unstable;
    else out.verdict = out.min_abs < opt.marginal_abs ? ideal::Verdict::marginal : ideal::Verdict::stable;
    out.samples = std::move(s);
    return out;
}

}  // namespace wlc::stability
