#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>

namespace wlc {

inline constexpr double hbar = 1.054571817e-34;
inline constexpr double c_light = 299792458.0;
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Physical configuration. Defaults are the nominal table values.
struct PhysicalParams {
    double L_arm = 4000.0;
    double P_arm = 8.0e5;
    double T_ITM = 0.005;
    double L_SRC = 40.0;
    double T_SRM = 0.02;
    double P_b = 6400.0;
    double lambda = 1064.0e-9;
    double m = 1.0e-5;
    double omega_m0 = two_pi * 1.0e5;
    std::optional<double> Q_m;  // empty: undamped oscillator, gamma_m is exactly 0
    double c = c_light;

    double omega_0() const { return two_pi * c / lambda; }
    double k_0() const { return omega_0() / c; }
    double tau_arm() const { return 2.0 * L_arm / c; }
    double tau_SRC() const { return 2.0 * L_SRC / c; }
    double R_ITM() const { return 1.0 - T_ITM; }
    double R_SRM() const { return 1.0 - T_SRM; }
    double A_arm() const { return std::sqrt(P_arm / (2.0 * hbar * omega_0())); }
    double A_b() const { return std::sqrt(P_b / (2.0 * hbar * omega_0())); }
    double gamma_m() const { return Q_m ? omega_m0 / *Q_m : 0.0; }
};

struct EffectiveParams {
    double omega_s = 0;
    double G = 0;
    double alpha_sig = 0;
    double gamma = 0;
    double gamma_m = 0;
    double omega_m = 0;  // pump offset including the analytic spring shift
};

namespace params {

// Throws std::domain_error when an invariant is violated. P_b = 0 is allowed.
void validate(const PhysicalParams& p);

EffectiveParams derive_effective(const PhysicalParams& p);

// Analytic spring shift P_b w0 / (2 m wm0^2 c^2 tau_b). The default tau_b is
// L_SRC/(4c), which makes the shift equal G^2/(2 wm0) of the single-mode model.
double default_tau_b(const PhysicalParams& p);
double optical_spring_shift(const PhysicalParams& p);
double optical_spring_shift(const PhysicalParams& p, double tau_b);

// Negative-dispersion condition 4 w0 P_f/(m w_m c^2 T_ITM) / (c/L_arm), P_f = P_b.
double phase_matching_ratio(const PhysicalParams& p);

// Returns p with P_b scaled so that G = ratio * omega_s.
PhysicalParams with_g_ratio(PhysicalParams p, double ratio);

// Flat key=value config. '#' starts a comment. Unknown keys throw.
PhysicalParams parse_config(const std::string& text, PhysicalParams base = {});
PhysicalParams load_config(const std::string& path, PhysicalParams base = {});
void set_value(PhysicalParams& p, const std::string& key, const std::string& value);
std::string serialize_config(const PhysicalParams& p);
std::map<std::string, std::string> to_map(const PhysicalParams& p);

}  // namespace params
}  // namespace wlc
