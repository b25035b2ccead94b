#pragma once

#include <vector>

#include "wlc/params.hpp"
#include "wlc/spectrum.hpp"

// Single-mode resolved-sideband model of the signal-recycled interferometer
// with the optomechanical filter. Fields vary as e^{-i Omega t}.
namespace wlc::ideal {

struct IdealIOResult {
    cd t_in_out;
    cd v_signal;
    double omega = 0;
};

enum class Verdict { stable, marginal, unstable };

struct PoleSet {
    cd roots[2];
    bool stable = false;
    bool marginal = false;
    Verdict verdict() const;
};

// Common denominator i Omega (gamma - i Omega) + G^2 - omega_s^2.
cd denominator(double omega, const EffectiveParams& e);

// Throws std::domain_error at a pole (G = omega_s, Omega = 0).
IdealIOResult ideal_io(double omega, const EffectiveParams& e);

double shot_noise_psd(double omega, const EffectiveParams& e);
// grid in rad/s, strictly increasing and positive; output frequencies in Hz.
RealSpectrum ideal_shot_noise_psd(const std::vector<double>& grid, const EffectiveParams& e);

PoleSet ideal_poles(const EffectiveParams& e);

const char* to_string(Verdict v);

}  // namespace wlc::ideal
