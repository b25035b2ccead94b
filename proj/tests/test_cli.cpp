#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli_app.hpp"
#include "report.hpp"

using namespace wlc;
namespace fs = std::filesystem;
using report::json;

namespace {

struct Result {
    int code = 0;
    std::string out, err;
};

Result wlc_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "wlc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Result r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// fresh scratch directory per test case
fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("wlc-test-" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<fs::path> files_in(const fs::path& d) {
    std::vector<fs::path> v;
    for (const auto& e : fs::directory_iterator(d)) v.push_back(e.path());
    std::sort(v.begin(), v.end());
    return v;
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

// stdout lists the written files first, then the summary object
json summary_of(const Result& r) { return json::parse(r.out.substr(r.out.find('{'))); }

fs::path find_one(const fs::path& d, const std::string& suffix) {
    fs::path hit;
    int n = 0;
    for (const auto& p : files_in(d)) {
        const std::string s = p.filename().string();
        if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
            hit = p;
            ++n;
        }
    }
    REQUIRE_MESSAGE(n == 1, "expected one *" << suffix << " in " << d);
    return hit;
}

}  // namespace

TEST_CASE("config hash") {
    const PhysicalParams p;
    CHECK(report::config_hash(p, "a") == report::config_hash(p, "a"));
    CHECK(report::config_hash(p, "a").size() == 16);
    CHECK(report::config_hash(p, "a") != report::config_hash(p, "b"));
    PhysicalParams q = p;
    q.L_arm += 1e-9;
    CHECK(report::config_hash(p, "a") != report::config_hash(q, "a"));
}

TEST_CASE("CSV tables round trip") {
    const fs::path d = scratch("csv");
    report::Table t;
    t.meta = {{"quantity", "something"}, {"note", "a: b"}};
    t.add_column("x", {0.1, 1.0 / 3.0, 1e-300, -2.5e22});
    t.add_column("y", {std::nan(""), INFINITY, -INFINITY, 0.0});
    report::write_csv((d / "t.csv").string(), t);
    const report::Table r = report::read_csv((d / "t.csv").string());
    CHECK(r.columns == t.columns);
    CHECK(r.meta == t.meta);
    REQUIRE(r.rows() == 4);
    for (std::size_t k = 0; k < 4; ++k) CHECK(r.column("x")[k] == t.column("x")[k]);
    CHECK(std::isnan(r.column("y")[0]));
    CHECK(r.column("y")[1] == INFINITY);
    CHECK(r.column("y")[2] == -INFINITY);
    CHECK_THROWS(r.column("z"));
    CHECK_THROWS(report::read_csv((d / "missing.csv").string()));
}

TEST_CASE("repeated runs write identical outputs and a manifest") {
    const fs::path a = scratch("rep-a"), b = scratch("rep-b");
    for (const fs::path& d : {a, b}) {
        const Result r = wlc_cli({"-o", d.string(), "full-spectrum", "--points", "50", "--set", "Q_m=1e4"});
        REQUIRE_MESSAGE(r.code == 0, r.err);
    }
    const auto fa = files_in(a), fb = files_in(b);
    REQUIRE(fa.size() == 2);
    REQUIRE(fb.size() == 2);
    const fs::path csv = find_one(a, ".csv");
    CHECK(slurp(csv) == slurp(b / csv.filename()));

    const json m = read_json(find_one(a, ".manifest.json"));
    CHECK(m["command"] == "full-spectrum");
    CHECK(m["outputs"].size() == 1);
    CHECK(m["outputs"][0] == csv.filename().string());
    CHECK(m["config"]["Q_m"] == "10000");
    CHECK(m["seed"].is_null());
    CHECK(csv.filename().string() == "full-spectrum-" + m["config_hash"].get<std::string>() + ".csv");

    const report::Table t = report::read_csv(csv.string());
    CHECK(t.rows() == 50);
    CHECK(t.columns == std::vector<std::string>{"freq_hz", "sqrt_Shh_signal", "sqrt_Shh_idler", "re_cross", "im_cross"});

    // a different option changes the name
    const Result r = wlc_cli({"-o", a.string(), "full-spectrum", "--points", "51", "--set", "Q_m=1e4"});
    REQUIRE(r.code == 0);
    CHECK(files_in(a).size() == 4);
}

TEST_CASE("errors give a nonzero exit") {
    const fs::path d = scratch("err");
    CHECK(wlc_cli({"-o", d.string(), "no-such-command"}).code != 0);
    CHECK(wlc_cli({"-o", d.string()}).code != 0);
    const Result bad_key = wlc_cli({"-o", d.string(), "ideal-poles", "--set", "L_armm=3"});
    CHECK(bad_key.code == 1);
    CHECK(bad_key.err.find("L_armm") != std::string::npos);
    CHECK(wlc_cli({"-o", d.string(), "ideal-poles", "--set", "T_ITM=2"}).code == 1);
    CHECK(wlc_cli({"-o", d.string(), "nyquist", "--method", "guess"}).code == 1);
    CHECK(wlc_cli({"-o", d.string(), "td-run", "--dt", "1e-7", "--duration", "0.01"}).code == 1);
    CHECK(wlc_cli({"-o", d.string(), "full-spectrum", "--compensate", "maybe"}).code == 1);
    CHECK(wlc_cli({"--help"}).code == 0);
}

TEST_CASE("config file and overrides") {
    const fs::path d = scratch("cfg");
    PhysicalParams p;
    p.T_ITM = 0.007;
    {
        std::ofstream f(d / "p.cfg");
        f << "# detector\n" << params::serialize_config(p);
    }
    const Result r = wlc_cli({"-o", (d / "out").string(), "--config", (d / "p.cfg").string(), "ideal-poles"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const json m = read_json(find_one(d / "out", ".manifest.json"));
    const json poles = read_json(d / "out" / m["outputs"][0].get<std::string>());
    CHECK(poles["omega_s_rad_s"].get<double>() == doctest::Approx(params::derive_effective(p).omega_s).epsilon(1e-12));
    CHECK(poles["verdict"] == "stable");

    const Result g = wlc_cli({"-o", (d / "out2").string(), "ideal-poles", "--g-ratio", "1.01"});
    REQUIRE(g.code == 0);
    CHECK(json::parse(g.out)["verdict"] == "unstable");
}

TEST_CASE("blend reads a full-spectrum file") {
    const fs::path d = scratch("blend");
    const Result fsr = wlc_cli({"-o", d.string(), "full-spectrum", "--points", "200", "--f-lo", "5", "--f-hi", "5000"});
    REQUIRE(fsr.code == 0);
    const fs::path spec = find_one(d, ".csv");
    const Result br = wlc_cli({"-o", (d / "b").string(), "blend", "--input", spec.string()});
    REQUIRE_MESSAGE(br.code == 0, br.err);
    const json s = summary_of(br);
    CHECK(s["bins"] == 200);
    CHECK(s["bins_above_min"] == 0);
    const report::Table t = report::read_csv(find_one(d / "b", ".csv").string());
    for (std::size_t k = 0; k < t.rows(); ++k)
        CHECK(t.column("sqrt_S_blend")[k] <=
              std::min(t.column("sqrt_S_signal")[k], t.column("sqrt_S_idler")[k]) * (1 + 1e-9));
}

TEST_CASE("nyquist subcommand") {
    const fs::path d = scratch("nyq");
    const Result r = wlc_cli({"-o", d.string(), "nyquist", "--compensate", "off"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const json s = json::parse(r.out);
    CHECK(s["winding"] == 2);
    CHECK(s["verdict"] == "unstable");
    const report::Table t = report::read_csv(find_one(d, ".csv").string());
    CHECK(t.rows() == s["samples"].get<std::size_t>());
}

TEST_CASE("td-run writes records and a seeded manifest") {
    const fs::path d = scratch("td");
    const Result r = wlc_cli({"-o", d.string(), "td-run", "--mode", "step", "--duration", "0.1", "--seed", "5"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const json m = read_json(find_one(d, ".manifest.json"));
    CHECK(m["seed"] == 5);
    CHECK(m["outputs"].size() == 3);
    const report::Table env = report::read_csv(find_one(d, ".env.csv").string());
    // the record rate is the nearest integer fraction of the step rate to 100 kHz
    CHECK(static_cast<double>(env.rows()) == doctest::Approx(1e4).epsilon(0.01));
}

TEST_CASE("compare: pump off agrees with the frequency domain") {
    const fs::path d = scratch("cmp-off");
    const Result r = wlc_cli({"-o", d.string(), "compare", "--set", "P_b=0", "--duration", "0.8", "--segment", "4096"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const json j = summary_of(r);
    CHECK(j["all_agree"] == true);
    CHECK(j["verdicts"]["step_response"] == "stable");
    CHECK(j["td_vs_fd_signal_tf"]["magnitude"].get<double>() < 0.03);
    CHECK(j["td_vs_fd_signal_tf"]["phase_deg"].get<double>() < 1.0);
}

TEST_CASE("compare: an over-pumped detector is unstable everywhere") {
    const fs::path d = scratch("cmp-hi");
    const Result r = wlc_cli({"-o", d.string(), "compare", "--g-ratio", "1.01"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const json j = summary_of(r);
    CHECK(j["verdicts"]["ideal"] == "unstable");
    CHECK(j["verdicts"]["nyquist"] == "unstable");
    CHECK(j["verdicts"]["step_response"] == "unstable");
    CHECK(j["step_response"]["growth_rate"].get<double>() == doctest::Approx(184.3).epsilon(0.01));
    CHECK(j["spectra"].is_string());
}
