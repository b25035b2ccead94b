#include "report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "wlc/ideal_model.hpp"
#include "wlc/spectral.hpp"

#ifndef WLC_VERSION
#define WLC_VERSION "0.0.0"
#endif

namespace wlc::report {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

// Positive-frequency half of a two-sided ascending spectrum read at -f,
// returned with ascending f.
template <class S>
S negative_half(const S& in) {
    S out;
    out.meta = in.meta;
    for (std::size_t i = in.size(); i-- > 0;) {
        if (in.freq_hz[i] >= 0) continue;
        out.freq_hz.push_back(-in.freq_hz[i]);
        out.values.push_back(in.values[i]);
    }
    return out;
}

json verdict_json(ideal::Verdict v) { return ideal::to_string(v); }

bool stable_class(ideal::Verdict v) { return v != ideal::Verdict::unstable; }

}  // namespace

void Table::add_column(std::string name, std::vector<double> values) {
    if (!data.empty() && values.size() != rows()) throw std::invalid_argument("table: column length mismatch");
    columns.push_back(std::move(name));
    data.push_back(std::move(values));
}

const std::vector<double>& Table::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("table: no column '" + name + "'");
    return data[static_cast<std::size_t>(it - columns.begin())];
}

void write_csv(const std::string& path, const Table& t) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    for (const auto& [k, v] : t.meta) f << "# " << k << ": " << v << "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c) f << (c ? "," : "") << t.columns[c];
    f << "\n";
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.data.size(); ++c) f << (c ? "," : "") << fmt(t.data[c][r]);
        f << "\n";
    }
    if (!f) throw std::runtime_error("write failed for " + path);
}

Table read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    Table t;
    std::string line;
    bool header = false;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string body = trim(line.substr(1));
            const auto colon = body.find(':');
            if (colon != std::string::npos) t.meta.emplace_back(trim(body.substr(0, colon)), trim(body.substr(colon + 1)));
            continue;
        }
        const auto cells = split(line, ',');
        if (!header) {
            for (const auto& c : cells) t.columns.push_back(trim(c));
            t.data.resize(t.columns.size());
            header = true;
            continue;
        }
        if (cells.size() != t.columns.size())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": wrong number of fields");
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string cell = trim(cells[c]);
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad number");
            t.data[c].push_back(v);
        }
    }
    if (!header) throw std::runtime_error(path + ": no header line");
    return t;
}

std::string version() { return WLC_VERSION; }

std::string config_hash(const PhysicalParams& p, const std::string& options) {
    const std::string text = params::serialize_config(p) + "|" + options;
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json to_json(const Manifest& m) {
    json j;
    j["command"] = m.command;
    j["config_hash"] = m.config_hash;
    j["seed"] = m.seed ? json(*m.seed) : json(nullptr);
    j["code_version"] = version();
    j["outputs"] = m.outputs;
    j["wall_seconds"] = m.wall_seconds;
    j["config"] = m.config;
    return j;
}

PhysicalParams scenario_params(const Scenario& s) {
    return s.g_ratio >= 0 ? params::with_g_ratio(s.p, s.g_ratio) : s.p;
}

EffectiveParams scenario_effective(const Scenario& s) {
    return fd::pumped(scenario_params(s), s.compensate ? fd::Pump::compensated : fd::Pump::uncompensated);
}

Table ideal_spectrum(const PhysicalParams& p, const GridOptions& g) {
    const EffectiveParams e = params::derive_effective(p);
    const RealSpectrum s = ideal::ideal_shot_noise_psd(fd::log_grid(g.f_lo, g.f_hi, g.points), e);
    Table t;
    t.meta = {{"quantity", "single-mode shot-noise strain PSD, 1/Hz"},
              {"G_over_omega_s", fmt(e.G / e.omega_s)},
              {"gamma_rad_s", fmt(e.gamma)}};
    std::vector<double> amp(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) amp[i] = std::sqrt(s.values[i]);
    t.add_column("freq_hz", s.freq_hz);
    t.add_column("sqrt_Shh", amp);
    t.add_column("Shh", s.values);
    return t;
}

json ideal_poles(const PhysicalParams& p) {
    const EffectiveParams e = params::derive_effective(p);
    const ideal::PoleSet ps = ideal::ideal_poles(e);
    json j;
    j["roots"] = json::array();
    for (const cd& r : ps.roots) j["roots"].push_back({{"re", r.real()}, {"im", r.imag()}});
    j["verdict"] = verdict_json(ps.verdict());
    j["G_rad_s"] = e.G;
    j["omega_s_rad_s"] = e.omega_s;
    j["gamma_rad_s"] = e.gamma;
    return j;
}

Channel parse_channel(const std::string& s) {
    if (s == "signal") return Channel::signal;
    if (s == "idler") return Channel::idler;
    if (s == "both") return Channel::both;
    throw std::invalid_argument("unknown channel '" + s + "'");
}

Table full_spectrum(const PhysicalParams& p, const EffectiveParams& e, Channel ch, const GridOptions& g) {
    const fd::ChannelPSDs c = fd::channel_psds(fd::log_grid(g.f_lo, g.f_hi, g.points), p, e);
    const double fsr = two_pi * p.c / (2.0 * p.L_SRC);
    Table t;
    t.meta = {{"quantity", "strain-referred shot-noise PSD per readout channel, 1/Hz"},
              {"pump_offset_rad_s", fmt(e.omega_m)},
              {"spring_shift_hz", fmt((e.omega_m - p.omega_m0) / two_pi)},
              {"two_omega_m_over_fsr_src", fmt(2.0 * e.omega_m / fsr)},
              {"vacuum_level", fmt(fd::vacuum_level)}};
    t.add_column("freq_hz", c.signal.freq_hz);
    auto amp = [](const RealSpectrum& s) {
        std::vector<double> a(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) a[i] = std::sqrt(s.values[i]);
        return a;
    };
    if (ch != Channel::idler) t.add_column("sqrt_Shh_signal", amp(c.signal));
    if (ch != Channel::signal) t.add_column("sqrt_Shh_idler", amp(c.idler));
    if (ch == Channel::both) {
        std::vector<double> re(c.cross.size()), im(c.cross.size());
        for (std::size_t i = 0; i < c.cross.size(); ++i) {
            re[i] = c.cross.values[i].real();
            im[i] = c.cross.values[i].imag();
        }
        t.add_column("re_cross", re);
        t.add_column("im_cross", im);
    }
    return t;
}

NyquistRun nyquist(const PhysicalParams& p, const EffectiveParams& e, const stability::NyquistOptions& opt) {
    const stability::NyquistContour c = stability::nyquist(p, e, opt);
    NyquistRun r;
    std::vector<double> w, re, im;
    for (const auto& s : c.samples) {
        w.push_back(s.omega);
        re.push_back(s.z.real());
        im.push_back(s.z.imag());
    }
    r.contour.meta = {{"quantity", "normalized closed-loop characteristic along Omega + i epsilon"},
                      {"epsilon_rad_s", fmt(opt.epsilon)},
                      {"method", opt.method == stability::Method::numeric ? "numeric" : "analytic"}};
    r.contour.add_column("omega_rad_s", w);
    r.contour.add_column("re", re);
    r.contour.add_column("im", im);
    r.summary = {{"winding", c.winding},
                 {"winding_raw", c.winding_raw},
                 {"verdict", verdict_json(c.verdict)},
                 {"min_abs", c.min_abs},
                 {"omega_at_min_rad_s", c.omega_at_min},
                 {"samples", c.samples.size()},
                 {"pump_offset_rad_s", e.omega_m}};
    return r;
}

TdChannels td_channels(const PhysicalParams& p, double omega_p, const TdOptions& opt) {
    td::SimConfig c;
    c.duration = opt.duration;
    c.dt = opt.dt;
    c.transient_discard = opt.transient;
    c.seed = opt.seed;
    c.omega_p = omega_p;

    TdChannels out;
    const td::RunOutput sig = td::run_signal(p, c);
    if (sig.diverged) throw std::runtime_error("time-domain signal run diverged");
    out.wall_seconds += sig.wall_seconds;
    out.steps += sig.steps;
    const double fs = 1.0 / sig.signal.dt;
    spectral::WelchOptions w;
    w.segment = opt.segment;

    auto conj_all = [](std::vector<cd> v) {
        for (cd& z : v) z = std::conj(z);
        return v;
    };
    const std::vector<cd>& h = sig.strain.values;
    out.T_signal = negative_half(spectral::estimate_tf(h, sig.signal.values, fs, w));
    out.T_idler = negative_half(spectral::estimate_tf(h, conj_all(sig.idler.values), fs, w));
    if (!opt.noise) return out;

    c.seed = opt.seed + 1;
    const td::RunOutput noi = td::run_noise(p, c);
    if (noi.diverged) throw std::runtime_error("time-domain noise run diverged");
    out.wall_seconds += noi.wall_seconds;
    out.steps += noi.steps;
    const std::vector<cd> z2 = conj_all(noi.idler.values);
    const RealSpectrum b1 = negative_half(spectral::welch_psd(noi.signal.values, fs, w));
    const RealSpectrum b2 = negative_half(spectral::welch_psd(z2, fs, w));
    const ComplexSpectrum b12 = negative_half(spectral::welch_csd(z2, noi.signal.values, fs, w));

    out.S_signal = spectral::strain_refer(b1, out.T_signal);
    out.S_idler = spectral::strain_refer(b2, out.T_idler);
    out.cross = b12;
    for (std::size_t k = 0; k < b12.size(); ++k) {
        const cd den = out.T_signal.values[k] * std::conj(out.T_idler.values[k]);
        out.cross.values[k] = std::abs(den) > 0 ? b12.values[k] / den : cd(nan, nan);
    }
    return out;
}

BandDeviation band_deviation(const std::vector<double>& f_hz, const std::vector<cd>& est, const std::vector<cd>& model,
                             double f_lo, double f_hi) {
    BandDeviation d;
    for (std::size_t k = 0; k < f_hz.size(); ++k) {
        if (f_hz[k] < f_lo || f_hz[k] > f_hi) continue;
        const cd r = est[k] / model[k];
        if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) continue;
        d.magnitude += std::abs(std::abs(r) - 1.0);
        d.phase_deg += std::abs(std::arg(r)) * 180.0 / pi;
        ++d.bins;
    }
    if (d.bins) {
        d.magnitude /= static_cast<double>(d.bins);
        d.phase_deg /= static_cast<double>(d.bins);
    } else {
        d.magnitude = d.phase_deg = nan;
    }
    return d;
}

std::pair<std::vector<cd>, std::vector<cd>> fd_transfer(const std::vector<double>& f_hz, const PhysicalParams& p,
                                                        const EffectiveParams& e) {
    std::vector<cd> v0(f_hz.size()), v1(f_hz.size());
    for (std::size_t k = 0; k < f_hz.size(); ++k) {
        const fd::ClosedLoopIO io = fd::closed_loop_direct(two_pi * f_hz[k], p, e);
        v0[k] = io.v(0);
        v1[k] = io.v(1);
    }
    return {v0, v1};
}

Table blend_table(const RealSpectrum& S11, const RealSpectrum& S22, const ComplexSpectrum& S12, json* summary) {
    const blend::BlendSet b = blend::optimal_blend(S11, S22, S12);
    const std::size_t n = S11.size();
    std::vector<double> a1(n), a2(n), ab(n), re(n), im(n);
    std::size_t violations = 0;
    for (std::size_t k = 0; k < n; ++k) {
        a1[k] = std::sqrt(S11.values[k]);
        a2[k] = std::sqrt(S22.values[k]);
        ab[k] = std::sqrt(b.S_blend.values[k]);
        re[k] = b.w.values[k].real();
        im[k] = b.w.values[k].imag();
        if (b.S_blend.values[k] > std::min(S11.values[k], S22.values[k]) * (1.0 + 1e-9)) ++violations;
    }
    Table t;
    t.meta = {{"quantity", "strain-referred PSD of each channel and of the optimal blend"},
              {"weight", "z = w z_signal + (1 - w) z_idler"}};
    t.add_column("freq_hz", S11.freq_hz);
    t.add_column("sqrt_S_signal", a1);
    t.add_column("sqrt_S_idler", a2);
    t.add_column("sqrt_S_blend", ab);
    t.add_column("re_w", re);
    t.add_column("im_w", im);
    if (summary) {
        (*summary)["psd_crossovers_hz"] = blend::psd_crossovers(S11, S22);
        (*summary)["weight_crossovers_hz"] = blend::weight_crossovers(b);
        (*summary)["degenerate_bins"] = b.degenerate.size();
        (*summary)["bins_above_min"] = violations;
        (*summary)["bins"] = n;
    }
    return t;
}

void spectra_from_table(const Table& t, RealSpectrum& S11, RealSpectrum& S22, ComplexSpectrum& S12) {
    const auto& f = t.column("freq_hz");
    const auto& a1 = t.column("sqrt_Shh_signal");
    const auto& a2 = t.column("sqrt_Shh_idler");
    const auto& re = t.column("re_cross");
    const auto& im = t.column("im_cross");
    S11 = {};
    S22 = {};
    S12 = {};
    S11.freq_hz = S22.freq_hz = S12.freq_hz = f;
    for (std::size_t k = 0; k < f.size(); ++k) {
        S11.values.push_back(a1[k] * a1[k]);
        S22.values.push_back(a2[k] * a2[k]);
        S12.values.emplace_back(re[k], im[k]);
    }
}

CompareRun compare(const Scenario& s, const TdOptions& tdo) {
    const PhysicalParams p = scenario_params(s);
    const EffectiveParams e = scenario_effective(s);
    CompareRun r;
    json& j = r.report;

    const ideal::Verdict v_ideal = ideal::ideal_poles(params::derive_effective(p)).verdict();
    const stability::NyquistContour nyq = stability::nyquist(p, e);
    td::SimConfig sc;
    sc.duration = 0.5;
    sc.dt = tdo.dt;
    sc.omega_p = e.omega_m;
    const td::StepResponse step = td::run_step_response(p, sc);
    const ideal::Verdict v_step = step.unstable ? ideal::Verdict::unstable : ideal::Verdict::stable;

    j["verdicts"] = {{"ideal", verdict_json(v_ideal)},
                     {"nyquist", verdict_json(nyq.verdict)},
                     {"step_response", verdict_json(v_step)}};
    j["nyquist"] = {{"winding", nyq.winding}, {"min_abs", nyq.min_abs}};
    j["step_response"] = {{"growth_rate", step.growth_rate},
                          {"growth_sigma", step.growth_sigma},
                          {"tail_rate", step.tail_rate},
                          {"settle_time_s", step.settle_time}};
    j["full_models_agree"] = stable_class(nyq.verdict) == stable_class(v_step);
    j["all_agree"] = stable_class(nyq.verdict) == stable_class(v_step) && stable_class(v_ideal) == stable_class(v_step);
    j["pump_offset_rad_s"] = e.omega_m;

    if (step.unstable) {
        j["spectra"] = "skipped: the configuration is unstable in the time domain";
        return r;
    }

    const TdChannels tc = td_channels(p, e.omega_m, tdo);
    std::vector<double> f;
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < tc.T_signal.size(); ++k) {
        if (tc.T_signal.freq_hz[k] > 0 && tc.T_signal.freq_hz[k] <= 2.0e4) {
            f.push_back(tc.T_signal.freq_hz[k]);
            idx.push_back(k);
        }
    }
    std::vector<double> grid(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) grid[k] = two_pi * f[k];
    const fd::ChannelPSDs fdp = fd::channel_psds(grid, p, e);
    const auto [v0, v1] = fd_transfer(f, p, e);
    const RealSpectrum ideal_s = ideal::ideal_shot_noise_psd(grid, e);

    std::vector<cd> t0(f.size()), t1(f.size()), s_td(f.size()), s_fd(f.size());
    std::vector<double> c_ideal, c_fd0, c_td0, c_fd1, c_td1, c_afd, c_atd, c_pfd, c_ptd;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const std::size_t i = idx[k];
        t0[k] = tc.T_signal.values[i];
        t1[k] = tc.T_idler.values[i];
        s_td[k] = tc.S_signal.values[i];
        s_fd[k] = fdp.signal.values[k];
        c_ideal.push_back(std::sqrt(ideal_s.values[k]));
        c_fd0.push_back(std::sqrt(fdp.signal.values[k]));
        c_td0.push_back(std::sqrt(tc.S_signal.values[i]));
        c_fd1.push_back(std::sqrt(fdp.idler.values[k]));
        c_td1.push_back(std::sqrt(tc.S_idler.values[i]));
        c_afd.push_back(std::abs(v0[k]));
        c_atd.push_back(std::abs(t0[k]));
        c_pfd.push_back(std::arg(v0[k]));
        c_ptd.push_back(std::arg(t0[k]));
    }
    r.overlay.meta = {{"quantity", "ideal, frequency-domain and time-domain strain sensitivity and signal gain"},
                      {"td_segment", std::to_string(tdo.segment)},
                      {"td_duration_s", fmt(tdo.duration)}};
    r.overlay.add_column("freq_hz", f);
    r.overlay.add_column("sqrt_S_ideal", c_ideal);
    r.overlay.add_column("sqrt_S_fd_signal", c_fd0);
    r.overlay.add_column("sqrt_S_td_signal", c_td0);
    r.overlay.add_column("sqrt_S_fd_idler", c_fd1);
    r.overlay.add_column("sqrt_S_td_idler", c_td1);
    r.overlay.add_column("abs_T_fd_signal", c_afd);
    r.overlay.add_column("abs_T_td_signal", c_atd);
    r.overlay.add_column("arg_T_fd_signal", c_pfd);
    r.overlay.add_column("arg_T_td_signal", c_ptd);

    const BandDeviation dsig = band_deviation(f, t0, v0, 10.0, 1.0e4);
    j["td_vs_fd_signal_tf"] = {{"magnitude", dsig.magnitude}, {"phase_deg", dsig.phase_deg}, {"bins", dsig.bins}};
    if (p.P_b > 0) {
        const BandDeviation didl = band_deviation(f, t1, v1, 10.0, 1.0e4);
        j["td_vs_fd_idler_tf"] = {{"magnitude", didl.magnitude}, {"phase_deg", didl.phase_deg}, {"bins", didl.bins}};
    }
    const BandDeviation dpsd = band_deviation(f, s_td, s_fd, 10.0, 1.0e4);
    j["td_vs_fd_signal_psd"] = {{"relative", dpsd.magnitude}, {"bins", dpsd.bins}};
    double acc = 0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        if (f[k] < 100.0 || f[k] > 1000.0) continue;
        acc += std::abs(fdp.signal.values[k] / ideal_s.values[k] - 1.0);
        ++n;
    }
    j["fd_vs_ideal_psd_100_1000_hz"] = n ? acc / static_cast<double>(n) : nan;
    j["td_wall_seconds"] = tc.wall_seconds;
    return r;
}

}  // namespace wlc::report
