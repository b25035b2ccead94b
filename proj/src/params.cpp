#include "wlc/params.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wlc::params {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::domain_error("invalid parameter: " + what);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: cannot parse value for '" + key + "': " + v);
    }
    if (used != v.size()) throw std::invalid_argument("config: trailing junk in '" + key + "': " + v);
    return out;
}

std::string fmt_double(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

void validate(const PhysicalParams& p) {
    require(p.L_arm > 0, "L_arm > 0");
    require(p.L_SRC > 0, "L_SRC > 0");
    require(p.P_arm > 0, "P_arm > 0");
    require(p.P_b >= 0, "P_b >= 0");
    require(p.lambda > 0, "lambda > 0");
    require(p.m > 0, "m > 0");
    require(p.omega_m0 > 0, "omega_m0 > 0");
    require(p.c > 0, "c > 0");
    require(p.T_ITM > 0 && p.T_ITM < 1, "0 < T_ITM < 1");
    require(p.T_SRM > 0 && p.T_SRM < 1, "0 < T_SRM < 1");
    require(!p.Q_m || *p.Q_m > 0, "Q_m > 0");
}

EffectiveParams derive_effective(const PhysicalParams& p) {
    validate(p);
    EffectiveParams e;
    e.omega_s = p.c * std::sqrt(p.T_ITM) / (2.0 * std::sqrt(p.L_arm * p.L_SRC));
    e.G = std::sqrt(8.0 * pi * p.P_b / (p.m * p.lambda * p.omega_m0 * p.L_SRC));
    e.alpha_sig = std::sqrt(p.P_arm * p.L_arm * p.omega_0() / (p.c * hbar));
    e.gamma = p.c * p.T_SRM / (4.0 * p.L_SRC);
    e.gamma_m = p.gamma_m();
    e.omega_m = p.omega_m0 + optical_spring_shift(p);
    return e;
}

double default_tau_b(const PhysicalParams& p) { return p.L_SRC / (4.0 * p.c); }

double optical_spring_shift(const PhysicalParams& p) { return optical_spring_shift(p, default_tau_b(p)); }

double optical_spring_shift(const PhysicalParams& p, double tau_b) {
    validate(p);
    require(tau_b > 0, "tau_b > 0");
    return p.P_b * p.omega_0() / (2.0 * p.m * p.omega_m0 * p.omega_m0 * p.c * p.c * tau_b);
}

double phase_matching_ratio(const PhysicalParams& p) {
    const double wm = derive_effective(p).omega_m;
    const double lhs = 4.0 * p.omega_0() * p.P_b / (p.m * wm * p.c * p.c * p.T_ITM);
    return lhs / (p.c / p.L_arm);
}

PhysicalParams with_g_ratio(PhysicalParams p, double ratio) {
    require(ratio >= 0, "G ratio >= 0");
    const double ws = derive_effective(p).omega_s;
    const double G = ratio * ws;
    p.P_b = G * G * p.m * p.lambda * p.omega_m0 * p.L_SRC / (8.0 * pi);
    return p;
}

void set_value(PhysicalParams& p, const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    if (key == "Q_m") {
        if (v == "inf" || v == "Inf" || v == "infinity") {
            p.Q_m.reset();
        } else {
            const double q = to_double(key, v);
            if (std::isinf(q)) p.Q_m.reset();
            else p.Q_m = q;
        }
        return;
    }
    double* slot = nullptr;
    if (key == "L_arm") slot = &p.L_arm;
    else if (key == "P_arm") slot = &p.P_arm;
    else if (key == "T_ITM") slot = &p.T_ITM;
    else if (key == "L_SRC") slot = &p.L_SRC;
    else if (key == "T_SRM") slot = &p.T_SRM;
    else if (key == "P_b") slot = &p.P_b;
    else if (key == "lambda") slot = &p.lambda;
    else if (key == "m") slot = &p.m;
    else if (key == "omega_m0") slot = &p.omega_m0;
    else if (key == "c") slot = &p.c;
    if (!slot) throw std::invalid_argument("config: unknown key '" + key + "'");
    *slot = to_double(key, v);
}

PhysicalParams parse_config(const std::string& text, PhysicalParams base) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        set_value(base, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    validate(base);
    return base;
}

PhysicalParams load_config(const std::string& path, PhysicalParams base) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), base);
}

std::map<std::string, std::string> to_map(const PhysicalParams& p) {
    return {
        {"L_arm", fmt_double(p.L_arm)},   {"P_arm", fmt_double(p.P_arm)},
        {"T_ITM", fmt_double(p.T_ITM)},   {"L_SRC", fmt_double(p.L_SRC)},
        {"T_SRM", fmt_double(p.T_SRM)},   {"P_b", fmt_double(p.P_b)},
        {"lambda", fmt_double(p.lambda)}, {"m", fmt_double(p.m)},
        {"omega_m0", fmt_double(p.omega_m0)},
        {"Q_m", p.Q_m ? fmt_double(*p.Q_m) : std::string("inf")},
        {"c", fmt_double(p.c)},
    };
}

std::string serialize_config(const PhysicalParams& p) {
    std::string out;
    for (const auto& [k, v] : to_map(p)) out += k + " = " + v + "\n";
    return out;
}

}  // namespace wlc::params
