#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wlc/params.hpp"
#include "wlc/spectrum.hpp"

// Two-channel sideband model of the arm cavity + optomechanical filter.
//
// All fields are envelopes in the frame of the carrier w0 and vary as
// e^{-i Omega t}; a delay tau multiplies by e^{+i Omega tau}. The pump sits at
// w0 + w_p, so a sideband at Omega is coupled through the oscillator to the
// conjugate of the partner at Omega' = 2 w_p - Omega. Each linear solve uses
// the closed set {X(Omega), X^dag(Omega'), x(Omega - w_p)}; no truncation is
// involved beyond dropping the pump-free sidebands that never couple back.
namespace wlc::fd {

using Matrix2c = Eigen::Matrix2cd;
using Vector2c = Eigen::Vector2cd;
using Matrix4c = Eigen::Matrix<cd, 4, 4>;

enum class Pump { uncompensated, analytic, compensated };

// Effective parameters with omega_m set to the pump offset actually used.
EffectiveParams pumped(const PhysicalParams& p, Pump mode);

// Which part of the network is solved.
//   closed : arm loop closed, inputs b_in and h
//   arm_cut: arm delay removed, a_2 is an input and a_1 an output (filter + ITM)
//   itm_cut: ITM and arm removed, b_4 is an input and b_3 an output
enum class Topology { closed, arm_cut, itm_cut };

// Result of one linear solve at signal frequency Omega (w0 frame).
struct Solution {
    // rows follow the internal unknown layout; columns are
    // [b_in(O), b_in^dag(O'), h(O), port(O), port^dag(O')] where the port is
    // a_2 for arm_cut and b_4 for itm_cut
    Eigen::Matrix<cd, 15, 5> X;
    cd det;       // determinant of the scaled system matrix
    cd mech_diag;  // scaled mechanical susceptibility entry of that matrix
};

// omega may be complex (contour evaluations above the real axis).
Solution solve_network(cd omega, const PhysicalParams& p, double omega_p, Topology topo);

// 4x4 map [b_in(w), b_in^dag(-w), a_2(w), a_2^dag(-w)] ->
//         [b_out(w), b_out^dag(-w), a_1(w), a_1^dag(-w)], w in the pump frame.
struct FilterScattering {
    Matrix4c M;
    double omega_tilde = 0;
};
FilterScattering filter_scattering(double omega_tilde, const PhysicalParams& p, const EffectiveParams& e);

struct ChannelMatrices {
    Matrix4c R_aa, T_ab, R_bb, T_ba;
};
ChannelMatrices channel_matrices(double omega, const PhysicalParams& p, const EffectiveParams& e);

// Pump offset that zeroes the phase of the a_2 -> a_1 signal reflection at
// Omega -> 0+. Returns omega_m0 when the pump is off.
double compensate_spring(const PhysicalParams& p, double tol = 1e-4);

struct ClosedLoopIO {
    Matrix2c M;  // [b_in(O), b_in^dag(2w_m - O)] -> [b_out(O), b_out^dag(2w_m - O)]
    Vector2c v;  // response to h(O)
};
// Loop closed with the channel matrices (filter treated as an effective mirror).
ClosedLoopIO closed_loop_io(double omega, const PhysicalParams& p, const EffectiveParams& e);
// Same quantity from a direct solve of the full network.
ClosedLoopIO closed_loop_direct(double omega, const PhysicalParams& p, const EffectiveParams& e);

// Two-sided vacuum level of each sideband amplitude. Each quadrature then has
// unit single-sided PSD.
inline constexpr double vacuum_level = 0.5;

struct ChannelPSDs {
    RealSpectrum signal;
    RealSpectrum idler;
    ComplexSpectrum cross;  // E[n_sig n_idl^*] of strain-normalized noises
};
// grid in rad/s
ChannelPSDs channel_psds(const std::vector<double>& grid, const PhysicalParams& p, const EffectiveParams& e);

// Log grid in rad/s between f_lo and f_hi (Hz) with a small deterministic
// jitter to keep clear of exact poles.
std::vector<double> log_grid(double f_lo_hz, double f_hi_hz, std::size_t n, double jitter = 1e-3);

}  // namespace wlc::fd
