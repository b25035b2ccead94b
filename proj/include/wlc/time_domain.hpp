#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "wlc/params.hpp"
#include "wlc/spectrum.hpp"

// Discrete-time simulation of the arm cavity + optomechanical filter.
// Field envelopes live in the frame of the carrier w0. Every traversal time
// is an integer number of steps, so propagation is exact and the only
// discretization error comes from the oscillator update.
namespace wlc::td {

enum class Injection { none, step, white, custom };

struct SimConfig {
    double dt = 0;  // 0 selects tau_SRC / 2
    double duration = 0.5;
    double transient_discard = 0.2;
    std::uint64_t seed = 1;
    Injection signal = Injection::none;
    double step_amplitude = 1e-21;
    double white_psd = 1e-40;     // single-sided strain PSD for white injection, 1/Hz
                                  // (drawn at record_rate and interpolated, so it is
                                  // flat up to ~0.2 record_rate and absent near 2 w_p)
    std::vector<double> custom;   // strain per raw step for Injection::custom
    bool vacuum_noise = false;    // white vacuum on b_in
    double omega_p = 0;           // pump offset; 0 selects omega_m0
    std::optional<double> Q_m;    // overrides PhysicalParams::Q_m when set
    bool undamped = false;        // forces gamma_m = 0 (takes precedence over Q_m)
    bool prewarp = true;          // discrete oscillator resonates exactly at omega_m0 with
                                  // the continuous susceptibility slope there
    double record_rate = 1e5;     // Hz, rate of the decimated records
    double fir_stop_db = 80;
};

struct TimeSeries {
    double dt = 0;
    double t0 = 0;
    std::vector<cd> values;
};

// Linear-phase low-pass FIR (Kaiser-windowed sinc). cutoff and transition in
// units of the sample rate.
std::vector<double> design_lowpass(double cutoff, double transition, double stop_db);

// Running FIR + downsampler for one complex stream.
class Decimator {
public:
    Decimator() = default;
    Decimator(std::vector<double> taps, std::size_t factor);
    // Returns true when an output sample was produced.
    bool push(cd x, cd& out);
    std::size_t delay() const { return (taps_.size() - 1) / 2; }

private:
    std::vector<double> taps_;
    std::vector<cd> buf_;  // doubled ring buffer so every window is contiguous
    std::size_t n_ = 0, pos_ = 0, factor_ = 1, phase_ = 0;
};

// Upsampler by an integer factor: zero-stuffing + polyphase FIR.
class Interpolator {
public:
    Interpolator() = default;
    // taps designed at the output rate; gain is restored internally
    Interpolator(std::vector<double> taps, std::size_t factor);
    // Next output sample; `draw` supplies a new input sample when needed.
    template <class Draw>
    double next(Draw&& draw) {
        if (phase_ == 0) {
            pos_ = pos_ == 0 ? hist_.size() / 2 - 1 : pos_ - 1;
            const double v = draw();
            hist_[pos_] = v;
            hist_[pos_ + hist_.size() / 2] = v;
        }
        const double* h = hist_.data() + pos_;
        const double* t = poly_.data() + phase_ * width_;
        double acc = 0;
        for (std::size_t k = 0; k < width_; ++k) acc += t[k] * h[k];
        phase_ = phase_ + 1 == factor_ ? 0 : phase_ + 1;
        return acc;
    }
    std::size_t delay() const { return delay_; }

private:
    std::vector<double> poly_;  // factor x width, row j holds taps j, j+L, j+2L, ...
    std::vector<double> hist_;  // newest first, doubled
    std::size_t factor_ = 1, width_ = 0, pos_ = 0, phase_ = 0, delay_ = 0;
};

// All field envelopes at the current step plus the histories the delay
// lines read from. Everything is zero before the first step.
struct FieldState {
    cd a1, a2, b1, b2, b3, b4, b_in, b_out;
    std::vector<cd> hist_a1, hist_b1, hist_b4;  // ring buffers, power-of-two size
    std::size_t mask = 0;
    double x = 0, x_prev = 0;  // x[n], x[n-1]
    double force = 0;
    std::int64_t n = 0;
};

class Simulator {
public:
    // Checks that tau_SRC/2 and tau_arm are integer multiples of dt; throws
    // std::invalid_argument with a suggested dt otherwise.
    Simulator(const PhysicalParams& p, const SimConfig& cfg);

    // Advance one dt with the given strain and input field.
    void step(double h, cd b_in);

    const FieldState& state() const { return s_; }
    FieldState& state() { return s_; }
    double dt() const { return dt_; }
    double omega_p() const { return omega_p_; }
    int n_arm() const { return n_arm_; }
    int n_src() const { return n_src_; }
    double stiffness() const { return w2_; }

private:
    PhysicalParams p_;
    double dt_, omega_p_;
    int n_arm_, n_src_;
    double sT_, sR_, sTs_, sRs_;
    double kick_mag_, kap_;
    cd h_drive_;
    double w2_, gamma_m_, force_gain_ = 1.0;
    cd rot_, rot_step_;  // e^{-i w_p t_n}
    FieldState s_;
};

// Compartment count of the network for a given pump power: the arm delay,
// the ITM junction, the SRC half-trips, the SRM junction, the oscillator.
int compartment_count(const PhysicalParams& p);

struct RunOutput {
    TimeSeries signal;  // b_out, low-passed and decimated
    TimeSeries idler;   // b_out e^{+2i w_p t}, low-passed and decimated
    TimeSeries strain;  // injected h through the same filter
    std::vector<double> x_env;     // max |x| per record interval
    std::vector<double> bout_env;  // rms |b_out| per record interval
    double env_dt = 0;
    std::int64_t steps = 0;
    double dt = 0;
    double omega_p = 0;
    double wall_seconds = 0;
    bool diverged = false;
};

RunOutput run(const PhysicalParams& p, const SimConfig& cfg);

struct StepResponse {
    RunOutput run;
    bool unstable = false;
    double growth_rate = 0;   // fitted slope of log envelope, 1/s
    double growth_sigma = 0;
    double tail_rate = NAN;   // from increments of block means; < 0 while converging
    double settle_time = 0;   // s; negative when the envelope never settles
};

// Growth is judged on log(rms |b_out|) over the second half of the run.
// Unstable when the slope is positive at 3 sigma and above rate_floor, and
// the envelope is still accelerating (tail_rate > 0).
StepResponse run_step_response(const PhysicalParams& p, SimConfig cfg, double rate_floor = 0.0);

RunOutput run_noise(const PhysicalParams& p, SimConfig cfg);
RunOutput run_signal(const PhysicalParams& p, SimConfig cfg);

// Mix by e^{+i offset t_n} and low-pass (cutoff in rad/s), delay compensated.
TimeSeries demodulate(const TimeSeries& in, double offset, double cutoff, double stop_db = 80);

// First time after which the envelope stays within tol of its final level
// (mean of the last 20%). Returns -1 when it never settles.
double settling_time(const std::vector<double>& env, double env_dt, double tol = 0.05);

}  // namespace wlc::td
