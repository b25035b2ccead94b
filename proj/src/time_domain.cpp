#include "wlc/time_domain.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wlc::td {

namespace {

constexpr cd I{0.0, 1.0};

// Integer number of steps in `span`, or -1 when span/dt is not an integer.
int steps_in(double span, double dt) {
    const double r = span / dt;
    const double k = std::round(r);
    if (k < 1 || std::abs(r - k) > 1e-9 * std::max(1.0, k)) return -1;
    return static_cast<int>(k);
}

std::size_t pow2_at_least(std::size_t n) {
    std::size_t s = 1;
    while (s < n) s <<= 1;
    return s;
}

double resolve_dt(const PhysicalParams& p, const SimConfig& cfg) {
    return cfg.dt > 0 ? cfg.dt : p.tau_SRC() / 2.0;
}

}  // namespace

std::vector<double> design_lowpass(double cutoff, double transition, double stop_db) {
    if (!(cutoff > 0 && cutoff < 0.5) || !(transition > 0))
        throw std::invalid_argument("design_lowpass: cutoff must lie in (0, 0.5) cycles/sample");
    const double beta = stop_db > 50   ? 0.1102 * (stop_db - 8.7)
                        : stop_db > 21 ? 0.5842 * std::pow(stop_db - 21, 0.4) + 0.07886 * (stop_db - 21)
                                       : 0.0;
    std::size_t n = static_cast<std::size_t>(std::ceil((stop_db - 7.95) / (14.36 * transition))) + 1;
    if (n % 2 == 0) ++n;
    std::vector<double> h(n);
    const double mid = 0.5 * static_cast<double>(n - 1);
    const double i0b = std::cyl_bessel_i(0.0, beta);
    double sum = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) - mid;
        const double sinc = t == 0 ? 2.0 * cutoff : std::sin(two_pi * cutoff * t) / (pi * t);
        const double r = t / mid;
        const double w = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
        h[k] = sinc * w;
        sum += h[k];
    }
    for (double& v : h) v /= sum;
    return h;
}

Decimator::Decimator(std::vector<double> taps, std::size_t factor)
    : taps_(std::move(taps)), buf_(2 * taps_.size()), n_(taps_.size()), factor_(std::max<std::size_t>(factor, 1)) {}

bool Decimator::push(cd x, cd& out) {
    buf_[pos_] = x;
    buf_[pos_ + n_] = x;
    pos_ = pos_ + 1 == n_ ? 0 : pos_ + 1;
    if (++phase_ < factor_) return false;
    phase_ = 0;
    // window buf_[pos_ .. pos_+n_) is in time order; the taps are symmetric
    const cd* w = buf_.data() + pos_;
    double re = 0, im = 0;
    for (std::size_t k = 0; k < n_; ++k) {
        re += taps_[k] * w[k].real();
        im += taps_[k] * w[k].imag();
    }
    out = {re, im};
    return true;
}

Interpolator::Interpolator(std::vector<double> taps, std::size_t factor) : factor_(std::max<std::size_t>(factor, 1)) {
    width_ = (taps.size() + factor_ - 1) / factor_;
    poly_.assign(factor_ * width_, 0.0);
    for (std::size_t k = 0; k < taps.size(); ++k) poly_[(k % factor_) * width_ + k / factor_] = taps[k] * static_cast<double>(factor_);
    hist_.assign(2 * width_, 0.0);
    delay_ = (taps.size() - 1) / 2;
}

Simulator::Simulator(const PhysicalParams& p, const SimConfig& cfg) : p_(p) {
    params::validate(p);
    dt_ = resolve_dt(p, cfg);
    n_src_ = steps_in(p.tau_SRC() / 2.0, dt_);
    n_arm_ = steps_in(p.tau_arm(), dt_);
    if (n_src_ < 1 || n_arm_ < 1) {
        std::ostringstream os;
        os.precision(12);
        os << "time step " << dt_ << " s does not divide the traversal times; try dt = " << p.tau_SRC() / 2.0
           << " or an integer fraction of it";
        throw std::invalid_argument(os.str());
    }
    omega_p_ = cfg.omega_p > 0 ? cfg.omega_p : p.omega_m0;
    if (omega_p_ * dt_ >= pi / 2) throw std::invalid_argument("time step too coarse for the pump offset");
    sT_ = std::sqrt(p.T_ITM);
    sR_ = std::sqrt(p.R_ITM());
    sTs_ = std::sqrt(p.T_SRM);
    sRs_ = std::sqrt(p.R_SRM());
    kick_mag_ = 2.0 * (p.omega_0() + omega_p_) / p.c * p.A_b();
    kap_ = 2.0 * hbar * p.omega_0() / p.c * 2.0 * p.A_b();
    h_drive_ = 2.0 * I * p.k_0() * p.A_arm() * p.L_arm;
    const double wdt = p.omega_m0 * dt_;
    w2_ = cfg.prewarp ? 2.0 * (1.0 - std::cos(wdt)) / (dt_ * dt_) : p.omega_m0 * p.omega_m0;
    // near resonance the discrete response is the continuous one divided by
    // sin(wdt)/wdt (stiffness slope and damping alike); scale the force back
    force_gain_ = cfg.prewarp ? std::sin(wdt) / wdt : 1.0;
    if (cfg.undamped) gamma_m_ = 0;
    else if (cfg.Q_m) gamma_m_ = p.omega_m0 / *cfg.Q_m;
    else gamma_m_ = p.gamma_m();
    rot_ = 1.0;
    rot_step_ = std::polar(1.0, -omega_p_ * dt_);

    const std::size_t depth = pow2_at_least(static_cast<std::size_t>(std::max(n_arm_, n_src_)) + 1);
    s_ = FieldState{};
    s_.hist_a1.assign(depth, 0.0);
    s_.hist_b1.assign(depth, 0.0);
    s_.hist_b4.assign(depth, 0.0);
    s_.mask = depth - 1;
}

void Simulator::step(double h, cd b_in) {
    FieldState& s = s_;
    const std::size_t n = static_cast<std::size_t>(s.n);
    // delay compartments
    const cd a1_d = s.hist_a1[(n - n_arm_) & s.mask];
    const cd b1_d = s.hist_b1[(n - n_src_) & s.mask];
    const cd b4_d = s.hist_b4[(n - n_src_) & s.mask];
    const cd kick = kick_mag_ * s.x * (I * rot_);

    // junctions
    s.a2 = a1_d + h_drive_ * h;
    s.b3 = b1_d - kick;
    s.a1 = sT_ * s.b3 + sR_ * s.a2;
    s.b4 = sT_ * s.a2 - sR_ * s.b3;
    s.b2 = b4_d + kick;
    s.b_in = b_in;
    s.b1 = sTs_ * b_in - sRs_ * s.b2;
    s.b_out = sTs_ * s.b2 + sRs_ * b_in;

    // oscillator: symmetric second difference, solved for x[n+1]
    const cd B = b4_d - b1_d;
    s.force = 2.0 * kap_ * force_gain_ * (std::conj(rot_) * B).real();
    const double g = 0.5 * gamma_m_ * dt_;
    const double x_next =
        (s.force / p_.m * dt_ * dt_ + (2.0 - w2_ * dt_ * dt_) * s.x - (1.0 - g) * s.x_prev) / (1.0 + g);
    s.x_prev = s.x;
    s.x = x_next;

    s.hist_a1[n & s.mask] = s.a1;
    s.hist_b1[n & s.mask] = s.b1;
    s.hist_b4[n & s.mask] = s.b4;
    ++s.n;
    if ((s.n & 4095) == 0) {
        rot_ = std::polar(1.0, -std::fmod(omega_p_ * dt_ * static_cast<double>(s.n), two_pi));
    } else {
        rot_ *= rot_step_;
    }
}

int compartment_count(const PhysicalParams& p) { return p.P_b > 0 ? 3 : 2; }

RunOutput run(const PhysicalParams& p, const SimConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    Simulator sim(p, cfg);
    const double dt = sim.dt();
    const double fs = 1.0 / dt;
    const std::size_t factor = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(fs / cfg.record_rate)));
    const double rate = fs / static_cast<double>(factor);
    const auto taps = factor > 1 ? design_lowpass(0.5 * rate / fs, 0.6 * rate / fs, cfg.fir_stop_db)
                                 : std::vector<double>{1.0};
    Decimator dec_sig(taps, factor), dec_idl(taps, factor), dec_h(taps, factor);
    const std::size_t delay = dec_sig.delay();

    const std::int64_t steps = std::llround(cfg.duration / dt);
    if (steps <= 0) throw std::invalid_argument("run: duration shorter than one step");
    if (cfg.transient_discard > cfg.duration) throw std::invalid_argument("run: transient_discard exceeds duration");

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double field_sigma = std::sqrt(1.0 / (4.0 * dt));  // per real part
    // white strain: drawn at the record rate, interpolated to the step rate
    const double h_sigma = std::sqrt(cfg.white_psd * rate / 2.0);
    Interpolator up(factor > 1 ? design_lowpass(0.5 * rate / fs, 0.6 * rate / fs, cfg.fir_stop_db)
                               : std::vector<double>{1.0},
                    factor);
    auto draw_h = [&] { return h_sigma * normal(rng); };
    if (cfg.signal == Injection::custom && cfg.custom.size() < static_cast<std::size_t>(steps))
        throw std::invalid_argument("run: custom strain series shorter than the run");

    RunOutput out;
    out.dt = dt;
    out.omega_p = sim.omega_p();
    out.env_dt = dt * static_cast<double>(factor);
    out.signal.dt = out.idler.dt = out.strain.dt = out.env_dt;
    const std::size_t n_rec = static_cast<std::size_t>(steps) / factor + 1;
    out.signal.values.reserve(n_rec);
    out.idler.values.reserve(n_rec);
    out.strain.values.reserve(n_rec);
    out.x_env.reserve(n_rec);
    out.bout_env.reserve(n_rec);

    // e^{+2i w_p t_n} for the idler mixer
    const cd mix_step = std::polar(1.0, 2.0 * sim.omega_p() * dt);
    cd mix = 1.0;
    double blk_x = 0, blk_b = 0;
    std::size_t blk_n = 0;

    for (std::int64_t n = 0; n < steps; ++n) {
        double h = 0;
        switch (cfg.signal) {
            case Injection::none: break;
            case Injection::step: h = cfg.step_amplitude; break;
            case Injection::white: h = up.next(draw_h); break;
            case Injection::custom: h = cfg.custom[static_cast<std::size_t>(n)]; break;
        }
        cd b_in = 0.0;
        if (cfg.vacuum_noise) {
            const double re = normal(rng);
            const double im = normal(rng);
            b_in = field_sigma * cd(re, im);
        }
        sim.step(h, b_in);
        const cd bo = sim.state().b_out;

        cd o;
        if (dec_sig.push(bo, o)) out.signal.values.push_back(o);
        if (dec_idl.push(bo * mix, o)) out.idler.values.push_back(o);
        if (dec_h.push(h, o)) out.strain.values.push_back(o);

        blk_x = std::max(blk_x, std::abs(sim.state().x));
        blk_b += std::norm(bo);
        if (++blk_n == factor) {
            out.x_env.push_back(blk_x);
            out.bout_env.push_back(std::sqrt(blk_b / static_cast<double>(factor)));
            if (!std::isfinite(blk_b) || !std::isfinite(blk_x) || blk_b > 1e280) {
                out.diverged = true;
                out.steps = n + 1;
                break;
            }
            blk_x = blk_b = 0;
            blk_n = 0;
        }
        const std::int64_t next = n + 1;
        mix = (next & 4095) == 0 ? std::polar(1.0, std::fmod(2.0 * sim.omega_p() * dt * static_cast<double>(next), two_pi))
                                 : mix * mix_step;
        out.steps = next;
    }

    // Output k is produced after input k*factor + factor - 1 and is centred
    // `delay` inputs earlier. Drop records from the transient.
    const double t_first = (static_cast<double>(factor) - 1.0 - static_cast<double>(delay)) * dt;
    std::size_t skip = 0;
    while (t_first + static_cast<double>(skip) * out.env_dt < cfg.transient_discard) ++skip;
    // the filter needs a full window before its outputs are meaningful
    skip = std::max(skip, (taps.size() + factor - 1) / factor);
    for (TimeSeries* ts : {&out.signal, &out.idler, &out.strain}) {
        const std::size_t k = std::min(skip, ts->values.size());
        ts->values.erase(ts->values.begin(), ts->values.begin() + static_cast<std::ptrdiff_t>(k));
        ts->t0 = t_first + static_cast<double>(k) * out.env_dt;
    }
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return out;
}

double settling_time(const std::vector<double>& env, double env_dt, double tol) {
    if (env.size() < 10) return -1;
    const std::size_t tail = env.size() / 5;
    double final_level = 0;
    for (std::size_t i = env.size() - tail; i < env.size(); ++i) final_level += env[i];
    final_level /= static_cast<double>(tail);
    if (!(final_level > 0)) return -1;
    for (std::size_t i = env.size() - tail; i < env.size(); ++i)
        if (std::abs(env[i] - final_level) > tol * final_level) return -1;
    std::size_t last_out = 0;
    bool any = false;
    for (std::size_t i = 0; i < env.size(); ++i) {
        if (std::abs(env[i] - final_level) > tol * final_level) {
            last_out = i;
            any = true;
        }
    }
    return any ? static_cast<double>(last_out + 1) * env_dt : 0.0;
}

StepResponse run_step_response(const PhysicalParams& p, SimConfig cfg, double rate_floor) {
    cfg.signal = Injection::step;
    cfg.vacuum_noise = false;
    cfg.transient_discard = 0;
    StepResponse r;
    r.run = run(p, cfg);
    if (r.run.diverged) {
        r.unstable = true;
        r.growth_rate = INFINITY;
        r.settle_time = -1;
        return r;
    }
    const auto& env = r.run.bout_env;
    const std::size_t n = env.size();
    std::size_t used = 0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = n / 2; i < n; ++i) {
        if (!(env[i] > 0)) continue;
        const double t = static_cast<double>(i) * r.run.env_dt;
        const double y = std::log(env[i]);
        pts.emplace_back(t, y);
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        ++used;
    }
    if (used >= 3) {
        const double k = static_cast<double>(used);
        const double den = k * sxx - sx * sx;
        const double slope = (k * sxy - sx * sy) / den;
        const double icpt = (sy - slope * sx) / k;
        double ss = 0;
        for (auto [t, y] : pts) ss += (y - icpt - slope * t) * (y - icpt - slope * t);
        const double var = ss / (k - 2.0);
        r.growth_rate = slope;
        r.growth_sigma = std::sqrt(var * k / den);
    }
    // A noiseless envelope creeping up to its final level also has a
    // significant positive slope. Growth additionally needs the increments
    // between three consecutive block means to increase.
    const std::size_t blk = (n - n / 2) / 3;
    if (blk >= 1) {
        double m[3] = {0, 0, 0};
        for (int b = 0; b < 3; ++b) {
            for (std::size_t i = 0; i < blk; ++i) m[b] += env[n / 2 + b * blk + i];
            m[b] /= static_cast<double>(blk);
        }
        const double d1 = m[1] - m[0], d2 = m[2] - m[1];
        r.tail_rate = d1 * d2 > 0 ? std::log(d2 / d1) / (static_cast<double>(blk) * r.run.env_dt) : NAN;
    }
    r.unstable = used >= 3 && r.growth_rate > 3.0 * r.growth_sigma && r.growth_rate > rate_floor && r.tail_rate > 0;
    r.settle_time = r.unstable ? -1 : settling_time(env, r.run.env_dt);
    return r;
}

RunOutput run_noise(const PhysicalParams& p, SimConfig cfg) {
    cfg.vacuum_noise = true;
    cfg.signal = Injection::none;
    return run(p, cfg);
}

RunOutput run_signal(const PhysicalParams& p, SimConfig cfg) {
    cfg.vacuum_noise = false;
    if (cfg.signal != Injection::custom) cfg.signal = Injection::white;
    return run(p, cfg);
}

TimeSeries demodulate(const TimeSeries& in, double offset, double cutoff, double stop_db) {
    if (std::abs(offset) * in.dt >= pi) throw std::invalid_argument("demodulate: offset aliases at this sample rate");
    const double fc = cutoff / two_pi * in.dt;
    const auto taps = design_lowpass(fc, fc, stop_db);
    const std::size_t n = in.values.size(), m = taps.size(), d = (m - 1) / 2;
    std::vector<cd> mixed(n);
    for (std::size_t k = 0; k < n; ++k)
        mixed[k] = in.values[k] * std::polar(1.0, std::fmod(offset * (in.t0 + in.dt * static_cast<double>(k)), two_pi));
    TimeSeries out{in.dt, in.t0, std::vector<cd>(n)};
    for (std::size_t k = 0; k < n; ++k) {
        cd acc = 0;
        for (std::size_t j = 0; j < m; ++j) {
            const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(k + d) - static_cast<std::ptrdiff_t>(j);
            if (idx >= 0 && idx < static_cast<std::ptrdiff_t>(n)) acc += taps[j] * mixed[static_cast<std::size_t>(idx)];
        }
        out.values[k] = acc;
    }
    return out;
}

}  // namespace wlc::td
