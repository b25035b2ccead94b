#pragma once

#include <vector>

#include "wlc/freq_domain.hpp"
#include "wlc/ideal_model.hpp"

// Nyquist analysis of the loop closed at the ITM: the optomechanical filter
// (SRC + oscillator) seen from inside the SRC, times the arm-cavity
// reflection. Channel basis [X(Omega), X^dag(2 w_m - Omega)].
namespace wlc::stability {

using fd::Matrix2c;

// Arm-cavity reflection seen from the SRC, all-pass.
cd cavity_reflection(cd omega, const PhysicalParams& p);
Matrix2c cavity_matrix(cd omega, const PhysicalParams& p, const EffectiveParams& e);

// Closed-form optomechanical matrix in the single-mode limit, with g = G.
Matrix2c optomechanical_matrix(cd omega, const PhysicalParams& p, const EffectiveParams& e);
// M_opt * M_cav from the closed forms above.
Matrix2c open_loop(cd omega, const PhysicalParams& p, const EffectiveParams& e);

// Filter response b_4 -> b_3 extracted from the full network, sign chosen so
// that the closed loop is det(I + M_OL).
Matrix2c optomechanical_matrix_numeric(cd omega, const PhysicalParams& p, const EffectiveParams& e);
Matrix2c open_loop_numeric(cd omega, const PhysicalParams& p, const EffectiveParams& e);

enum class Method {
    numeric,   // full-network filter; open-loop mechanical pole cancelled
    analytic,  // closed-form single-mode filter
};

// det(I + M_OL) divided by its pump-off value, which has no zeros above the
// real axis. For the numeric method it is also multiplied by the filter's
// own mechanical characteristic so the result has no poles above the
// contour. The number of closed-loop poles above the contour then equals the
// winding number about the origin.
cd characteristic(cd omega, const PhysicalParams& p, const EffectiveParams& e, Method method);

struct NyquistOptions {
    Method method = Method::numeric;
    double omega_max_factor = 4.0;  // sweep [-f w_m, f w_m]
    double epsilon = 1.0;           // contour runs at Omega + i epsilon, rad/s
    std::size_t base_points = 20001;
    double max_phase_step = pi / 4;
    int max_refine_passes = 40;
    // no enclosure but the contour passes closer than this to the origin:
    // reported as marginal
    double marginal_abs = 1e-3;
};

struct NyquistSample {
    double omega;  // real part of the contour point, rad/s
    cd z;
};

struct NyquistContour {
    std::vector<NyquistSample> samples;
    int winding = 0;
    double winding_raw = 0;  // accumulated argument / 2 pi before rounding
    double min_abs = 0;
    double omega_at_min = 0;
    double closure_step = 0;  // argument jump of the closing segment, rad
    ideal::Verdict verdict = ideal::Verdict::stable;
};

NyquistContour nyquist(const PhysicalParams& p, const EffectiveParams& e, const NyquistOptions& opt = {});

}  // namespace wlc::stability
