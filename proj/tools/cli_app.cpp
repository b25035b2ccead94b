#include "cli_app.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>

#include "CLI11.hpp"
#include "report.hpp"

namespace wlc::cli {

namespace {

using report::json;

struct Common {
    std::string config;
    std::vector<std::string> sets;
    std::string out_dir = ".";
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

PhysicalParams load_params(const Common& c) {
    PhysicalParams p = c.config.empty() ? PhysicalParams{} : params::load_config(c.config);
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + s + "'");
        params::set_value(p, trim(s.substr(0, eq)), s.substr(eq + 1));
    }
    params::validate(p);
    return p;
}

bool on_off(const std::string& s) {
    if (s == "on") return true;
    if (s == "off") return false;
    throw std::invalid_argument("expected on|off, got '" + s + "'");
}

// Names every output <command>-<hash>.<ext> and records them in a manifest.
class Writer {
public:
    Writer(const Common& c, std::string command, const PhysicalParams& p, const std::string& options,
           std::optional<std::uint64_t> seed)
        : dir_(c.out_dir), start_(std::chrono::steady_clock::now()) {
        m_.command = std::move(command);
        m_.config_hash = report::config_hash(p, options);
        m_.seed = seed;
        for (const auto& [k, v] : params::to_map(p)) m_.config[k] = v;
        std::filesystem::create_directories(dir_);
    }

    std::string stem() const { return m_.command + "-" + m_.config_hash; }

    std::string csv(report::Table t, const std::string& ext = "csv") {
        t.meta.insert(t.meta.begin(), {{"command", m_.command},
                                       {"config_hash", m_.config_hash},
                                       {"code_version", report::version()},
                                       {"manifest", stem() + ".manifest.json"}});
        return record(ext, [&](const std::string& path) { report::write_csv(path, t); });
    }

    std::string json_file(const json& j, const std::string& ext = "json") {
        json full = j;
        full["manifest"] = stem() + ".manifest.json";
        return record(ext, [&](const std::string& path) {
            std::ofstream f(path);
            if (!f) throw std::runtime_error("cannot write " + path);
            f << full.dump(2) << "\n";
            if (!f) throw std::runtime_error("write failed for " + path);
        });
    }

    std::string finish() {
        m_.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const std::string path = (std::filesystem::path(dir_) / (stem() + ".manifest.json")).string();
        std::ofstream f(path);
        f << report::to_json(m_).dump(2) << "\n";
        if (!f) throw std::runtime_error("write failed for " + path);
        return path;
    }

private:
    std::string record(const std::string& ext, const std::function<void(const std::string&)>& write) {
        const std::string name = stem() + "." + ext;
        write((std::filesystem::path(dir_) / name).string());
        m_.outputs.push_back(name);
        return name;
    }

    std::string dir_;
    report::Manifest m_;
    std::chrono::steady_clock::time_point start_;
};

void add_grid(CLI::App* sub, report::GridOptions& g) {
    sub->add_option("--f-lo", g.f_lo, "lowest frequency, Hz")->capture_default_str();
    sub->add_option("--f-hi", g.f_hi, "highest frequency, Hz")->capture_default_str();
    sub->add_option("--points", g.points, "log-spaced grid points")->capture_default_str();
}

void add_td(CLI::App* sub, report::TdOptions& t) {
    sub->add_option("--duration", t.duration, "simulated time, s")->capture_default_str();
    sub->add_option("--dt", t.dt, "time step, s (0: tau_SRC/2)")->capture_default_str();
    sub->add_option("--transient", t.transient, "discarded start-up, s")->capture_default_str();
    sub->add_option("--seed", t.seed, "random seed")->capture_default_str();
    sub->add_option("--segment", t.segment, "Welch segment length")->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"White-light-cavity detector models: ideal, frequency domain, time domain", "wlc"};
    app.fallthrough();
    app.require_subcommand(1);
    Common common;
    app.add_option("--config", common.config, "flat key = value parameter file");
    app.add_option("--set", common.sets, "parameter override key=value (repeatable)");
    app.add_option("-o,--out-dir", common.out_dir, "output directory")->capture_default_str();

    std::string compensate = "on", channel = "both", method = "numeric", mode = "step", input, source = "fd";
    double g_ratio = -1;
    report::GridOptions grid;
    report::TdOptions tdo;
    stability::NyquistOptions nopt;

    std::function<void()> action;
    std::string command;

    auto scenario = [&] { return report::Scenario{load_params(common), g_ratio, on_off(compensate)}; };
    auto opts_of = [&](CLI::App* sub) { return sub->config_to_str(true, false); };

    auto* s_is = app.add_subcommand("ideal-spectrum", "single-mode shot-noise strain PSD");
    add_grid(s_is, grid);
    s_is->add_option("--g-ratio", g_ratio, "set P_b so that G = ratio * omega_s");
    s_is->callback([&] {
        command = "ideal-spectrum";
        action = [&] {
            const report::Scenario sc = scenario();
            const PhysicalParams p = report::scenario_params(sc);
            Writer w(common, command, p, opts_of(s_is), std::nullopt);
            out << w.csv(report::ideal_spectrum(p, grid)) << "\n";
            w.finish();
        };
    });

    auto* s_ip = app.add_subcommand("ideal-poles", "roots of the single-mode characteristic polynomial");
    s_ip->add_option("--g-ratio", g_ratio, "set P_b so that G = ratio * omega_s");
    s_ip->callback([&] {
        command = "ideal-poles";
        action = [&] {
            const PhysicalParams p = report::scenario_params(scenario());
            Writer w(common, command, p, opts_of(s_ip), std::nullopt);
            const json j = report::ideal_poles(p);
            w.json_file(j);
            w.finish();
            out << j.dump(2) << "\n";
        };
    });

    auto* s_fs = app.add_subcommand("full-spectrum", "two-channel frequency-domain strain PSD");
    add_grid(s_fs, grid);
    s_fs->add_option("--channel", channel, "signal|idler|both")->capture_default_str();
    s_fs->add_option("--compensate", compensate, "on|off optical-spring compensation")->capture_default_str();
    s_fs->add_option("--g-ratio", g_ratio, "set P_b so that G = ratio * omega_s");
    s_fs->callback([&] {
        command = "full-spectrum";
        action = [&] {
            const report::Scenario sc = scenario();
            const PhysicalParams p = report::scenario_params(sc);
            Writer w(common, command, p, opts_of(s_fs), std::nullopt);
            out << w.csv(report::full_spectrum(p, report::scenario_effective(sc), report::parse_channel(channel), grid))
                << "\n";
            w.finish();
        };
    });

    auto* s_ny = app.add_subcommand("nyquist", "closed-loop characteristic contour and winding number");
    s_ny->add_option("--compensate", compensate, "on|off optical-spring compensation")->capture_default_str();
    s_ny->add_option("--g-ratio", g_ratio, "set P_b so that G = ratio * omega_s");
    s_ny->add_option("--method", method, "numeric|analytic")->capture_default_str();
    s_ny->add_option("--omega-max-factor", nopt.omega_max_factor, "sweep half-width in units of w_m")
        ->capture_default_str();
    s_ny->add_option("--epsilon", nopt.epsilon, "contour offset above the real axis, rad/s")->capture_default_str();
    s_ny->callback([&] {
        command = "nyquist";
        action = [&] {
            if (method == "numeric") nopt.method = stability::Method::numeric;
            else if (method == "analytic") nopt.method = stability::Method::analytic;
            else throw std::invalid_argument("--method expects numeric|analytic");
            const report::Scenario sc = scenario();
            const PhysicalParams p = report::scenario_params(sc);
            Writer w(common, command, p, opts_of(s_ny), std::nullopt);
            const report::NyquistRun r = report::nyquist(p, report::scenario_effective(sc), nopt);
            w.csv(r.contour);
            w.json_file(r.summary);
            w.finish();
            out << r.summary.dump(2) << "\n";
        };
    });

    auto* s_td = app.add_subcommand("td-run", "time-domain simulation");
    s_td->add_option("--mode", mode, "step|noise|signal")->capture_default_str();
    s_td->add_option("--compensate", compensate, "on|off optical-spring compensation")->capture_default_str();
    s_td->add_option("--g-ratio", g_ratio, "set P_b so that G = ratio * omega_s");
    add_td(s_td, tdo);
    s_td->callback([&] {
        command = "td-run";
        action = [&] {
            const report::Scenario sc = scenario();
            const PhysicalParams p = report::scenario_params(sc);
            const EffectiveParams e = report::scenario_effective(sc);
            Writer w(common, command, p, opts_of(s_td), tdo.seed);
            td::SimConfig c;
            c.duration = tdo.duration;
            c.dt = tdo.dt;
            c.transient_discard = tdo.transient;
            c.seed = tdo.seed;
            c.omega_p = e.omega_m;
            td::RunOutput r;
            json summary;
            if (mode == "step") {
                const td::StepResponse s = td::run_step_response(p, c);
                r = s.run;
                summary = {{"verdict", s.unstable ? "unstable" : "stable"},
                           {"growth_rate", s.growth_rate},
                           {"growth_sigma", s.growth_sigma},
                           {"tail_rate", s.tail_rate},
                           {"settle_time_s", s.settle_time},
                           {"diverged", r.diverged}};
            } else if (mode == "noise") {
                r = td::run_noise(p, c);
            } else if (mode == "signal") {
                r = td::run_signal(p, c);
            } else {
                throw std::invalid_argument("--mode expects step|noise|signal");
            }
            summary["steps"] = r.steps;
            summary["dt"] = r.dt;
            summary["pump_offset_rad_s"] = r.omega_p;
            summary["sim_wall_seconds"] = r.wall_seconds;

            report::Table t;
            t.meta = {{"dt", std::to_string(r.dt)},
                      {"record_dt", std::to_string(r.signal.dt)},
                      {"duration", std::to_string(tdo.duration)},
                      {"channels", "signal = b_out; idler = b_out e^{2i w_p t}; strain = injected h"}};
            std::vector<double> tt, sr, si, ir, ii, h;
            for (std::size_t k = 0; k < r.signal.values.size(); ++k) {
                tt.push_back(r.signal.t0 + r.signal.dt * static_cast<double>(k));
                sr.push_back(r.signal.values[k].real());
                si.push_back(r.signal.values[k].imag());
                ir.push_back(r.idler.values[k].real());
                ii.push_back(r.idler.values[k].imag());
                h.push_back(r.strain.values[k].real());
            }
            t.add_column("t_s", tt);
            t.add_column("re_signal", sr);
            t.add_column("im_signal", si);
            t.add_column("re_idler", ir);
            t.add_column("im_idler", ii);
            t.add_column("strain", h);
            out << w.csv(t) << "\n";
            if (mode == "step") {
                report::Table env;
                std::vector<double> te;
                for (std::size_t k = 0; k < r.bout_env.size(); ++k) te.push_back(r.env_dt * static_cast<double>(k + 1));
                env.add_column("t_s", te);
                env.add_column("rms_abs_b_out", r.bout_env);
                env.add_column("max_abs_x", r.x_env);
                out << w.csv(env, "env.csv") << "\n";
            }
            w.json_file(summary);
            w.finish();
            out << summary.dump(2) << "\n";
        };
    });

    auto* s_bl = app.add_subcommand("blend", "optimal signal/idler combination");
    s_bl->add_option("--input", input, "full-spectrum CSV with both channels and the cross spectrum");
    s_bl->add_option("--source", source, "fd|td when no input file is given")->capture_default_str();
    s_bl->add_option("--compensate", compensate, "on|off optical-spring compensation")->capture_default_str();
    s_bl->add_option("--g-ratio", g_ratio, "set P_b so that G = ratio * omega_s");
    add_grid(s_bl, grid);
    add_td(s_bl, tdo);
    s_bl->callback([&] {
        command = "blend";
        action = [&] {
            const report::Scenario sc = scenario();
            const PhysicalParams p = report::scenario_params(sc);
            std::string opts = opts_of(s_bl);
            RealSpectrum S11, S22;
            ComplexSpectrum S12;
            std::optional<std::uint64_t> seed;
            if (!input.empty()) {
                const report::Table t = report::read_csv(input);
                report::spectra_from_table(t, S11, S22, S12);
                opts += "|input-digest=" + report::config_hash(p, std::to_string(t.rows()));
            } else if (source == "fd") {
                const fd::ChannelPSDs c =
                    fd::channel_psds(fd::log_grid(grid.f_lo, grid.f_hi, grid.points), p, report::scenario_effective(sc));
                S11 = c.signal;
                S22 = c.idler;
                S12 = c.cross;
            } else if (source == "td") {
                const report::TdChannels c = report::td_channels(p, report::scenario_effective(sc).omega_m, tdo);
                // drop DC and bins beyond the requested band
                for (std::size_t k = 0; k < c.S_signal.size(); ++k) {
                    const double f = c.S_signal.freq_hz[k];
                    if (f < grid.f_lo || f > grid.f_hi) continue;
                    S11.freq_hz.push_back(f);
                    S11.values.push_back(c.S_signal.values[k]);
                    S22.freq_hz.push_back(f);
                    S22.values.push_back(c.S_idler.values[k]);
                    S12.freq_hz.push_back(f);
                    S12.values.push_back(c.cross.values[k]);
                }
                seed = tdo.seed;
            } else {
                throw std::invalid_argument("--source expects fd|td");
            }
            Writer w(common, command, p, opts, seed);
            json summary;
            out << w.csv(report::blend_table(S11, S22, S12, &summary)) << "\n";
            w.json_file(summary);
            w.finish();
            out << summary.dump(2) << "\n";
        };
    });

    auto* s_cmp = app.add_subcommand("compare", "ideal vs frequency-domain vs time-domain report");
    s_cmp->add_option("--compensate", compensate, "on|off optical-spring compensation")->capture_default_str();
    s_cmp->add_option("--g-ratio", g_ratio, "set P_b so that G = ratio * omega_s");
    add_td(s_cmp, tdo);
    s_cmp->callback([&] {
        command = "compare";
        action = [&] {
            const report::Scenario sc = scenario();
            Writer w(common, command, report::scenario_params(sc), opts_of(s_cmp), tdo.seed);
            const report::CompareRun r = report::compare(sc, tdo);
            if (r.overlay.rows()) out << w.csv(r.overlay) << "\n";
            w.json_file(r.report);
            w.finish();
            out << r.report.dump(2) << "\n";
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }
    try {
        action();
    } catch (const std::exception& e) {
        err << "wlc " << command << ": " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace wlc::cli
