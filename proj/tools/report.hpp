#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wlc/blending.hpp"
#include "wlc/freq_domain.hpp"
#include "wlc/stability.hpp"
#include "wlc/time_domain.hpp"

// Pipelines behind the CLI subcommands, kept out of main() so the tests can
// drive them directly. Frequencies in files are Hz.
namespace wlc::report {

using json = nlohmann::json;

// Column-major table, written as CSV with '#'-prefixed metadata lines.
struct Table {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;

    void add_column(std::string name, std::vector<double> values);
    const std::vector<double>& column(const std::string& name) const;
    std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
};

void write_csv(const std::string& path, const Table& t);
Table read_csv(const std::string& path);

std::string version();
// Stable 64-bit FNV-1a digest of the serialized config plus the options string.
std::string config_hash(const PhysicalParams& p, const std::string& options);

struct Manifest {
    std::string command;
    std::string config_hash;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> outputs;
    double wall_seconds = 0;
    json config;
};
json to_json(const Manifest& m);

// Operating point: configured params, optionally rescaled to G = g_ratio w_s,
// pumped at w_m0 or at the compensated offset.
struct Scenario {
    PhysicalParams p;
    double g_ratio = -1;  // < 0 keeps the configured P_b
    bool compensate = true;
};
PhysicalParams scenario_params(const Scenario& s);
EffectiveParams scenario_effective(const Scenario& s);

struct GridOptions {
    double f_lo = 1.0;
    double f_hi = 2.0e4;
    std::size_t points = 2000;
};

Table ideal_spectrum(const PhysicalParams& p, const GridOptions& g = {});
json ideal_poles(const PhysicalParams& p);

enum class Channel { signal, idler, both };
Channel parse_channel(const std::string& s);
Table full_spectrum(const PhysicalParams& p, const EffectiveParams& e, Channel ch, const GridOptions& g = {});

struct NyquistRun {
    Table contour;
    json summary;
};
NyquistRun nyquist(const PhysicalParams& p, const EffectiveParams& e, const stability::NyquistOptions& opt = {});

struct TdOptions {
    double duration = 2.0;
    double dt = 0;  // 0: tau_SRC / 2
    double transient = 0.2;
    std::uint64_t seed = 1;
    std::size_t segment = 1u << 14;
    bool noise = true;  // also run the vacuum-noise simulation
};

// Both readout channels from the time-domain engine, on the positive
// frequency grid of the estimator. The signal channel is b_out around
// -Omega; the idler channel is conj(b_out e^{2i w_p t}), which carries
// b_out^dag(2 w_p - Omega) at the same bin.
struct TdChannels {
    ComplexSpectrum T_signal, T_idler;
    RealSpectrum S_signal, S_idler;  // strain-referred, model convention
    ComplexSpectrum cross;           // E[n_sig conj(n_idl)]
    double wall_seconds = 0;
    std::int64_t steps = 0;
};
TdChannels td_channels(const PhysicalParams& p, double omega_p, const TdOptions& opt);

// Mean |(|r| - 1)| and mean |arg r| (degrees) of r = est / model over bins
// with f_lo <= f <= f_hi.
struct BandDeviation {
    double magnitude = 0;
    double phase_deg = 0;
    std::size_t bins = 0;
};
BandDeviation band_deviation(const std::vector<double>& f_hz, const std::vector<cd>& est,
                             const std::vector<cd>& model, double f_lo, double f_hi);

// Model transfer functions v_signal and v_idler at the given frequencies (Hz).
std::pair<std::vector<cd>, std::vector<cd>> fd_transfer(const std::vector<double>& f_hz, const PhysicalParams& p,
                                                        const EffectiveParams& e);

Table blend_table(const RealSpectrum& S11, const RealSpectrum& S22, const ComplexSpectrum& S12, json* summary);
// Reads the signal/idler/cross columns of a full-spectrum CSV.
void spectra_from_table(const Table& t, RealSpectrum& S11, RealSpectrum& S22, ComplexSpectrum& S12);

struct CompareRun {
    Table overlay;
    json report;
};
CompareRun compare(const Scenario& s, const TdOptions& td);

}  // namespace wlc::report
