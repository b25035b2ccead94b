#include "wlc/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <type_traits>

namespace wlc::spectral {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

struct Plan {
    fftw_plan plan = nullptr;
    std::vector<cd> buf;
    explicit Plan(std::size_t n) : buf(n) {
        auto* p = reinterpret_cast<fftw_complex*>(buf.data());
        plan = fftw_plan_dft_1d(static_cast<int>(n), p, p, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    ~Plan() { fftw_destroy_plan(plan); }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;
    void run() { fftw_execute(plan); }
};

std::vector<double> hann(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t k = 0; k < n; ++k)
        w[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    return w;
}

struct Layout {
    std::size_t seg, step, count;
};

Layout layout(std::size_t n, const WelchOptions& opt) {
    if (opt.segment < 8) throw std::invalid_argument("welch: segment too short");
    if (!(opt.overlap >= 0 && opt.overlap < 1)) throw std::invalid_argument("welch: overlap must lie in [0, 1)");
    const std::size_t step = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(opt.segment * (1 - opt.overlap))));
    if (n < opt.segment + step) throw std::invalid_argument("welch: series shorter than two segments");
    return {opt.segment, step, (n - opt.segment) / step + 1};
}

// Averaged conj(X) Y over segments, two-sided, in FFT order, scaled to PSD.
template <class T>
std::vector<cd> averaged(const std::vector<T>& x, const std::vector<T>* y, double fs, const WelchOptions& opt,
                         SpectrumMeta& meta) {
    if (y && y->size() != x.size()) throw std::invalid_argument("welch_csd: length mismatch");
    const Layout L = layout(x.size(), opt);
    const auto w = hann(L.seg);
    double w2 = 0;
    for (double v : w) w2 += v * v;
    Plan px(L.seg);
    std::unique_ptr<Plan> py;
    if (y) py = std::make_unique<Plan>(L.seg);
    std::vector<cd> acc(L.seg, 0.0);
    for (std::size_t s = 0; s < L.count; ++s) {
        const std::size_t off = s * L.step;
        for (std::size_t k = 0; k < L.seg; ++k) px.buf[k] = w[k] * cd(x[off + k]);
        px.run();
        if (y) {
            for (std::size_t k = 0; k < L.seg; ++k) py->buf[k] = w[k] * cd((*y)[off + k]);
            py->run();
            for (std::size_t k = 0; k < L.seg; ++k) acc[k] += std::conj(px.buf[k]) * py->buf[k];
        } else {
            for (std::size_t k = 0; k < L.seg; ++k) acc[k] += std::norm(px.buf[k]);
        }
    }
    const double scale = 1.0 / (fs * w2 * static_cast<double>(L.count));
    for (cd& v : acc) v *= scale;
    meta.segment = L.seg;
    meta.overlap = L.seg - L.step;
    meta.averages = L.count;
    meta.window = "hann";
    return acc;
}

// Two-sided FFT-order spectrum -> single-sided [0, fs/2].
template <class V>
void fold_single(const std::vector<cd>& two, double fs, std::vector<double>& freq, std::vector<V>& out) {
    const std::size_t n = two.size();
    const std::size_t half = n / 2;
    freq.resize(half + 1);
    out.resize(half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
        freq[k] = fs * static_cast<double>(k) / static_cast<double>(n);
        const bool edge = k == 0 || (n % 2 == 0 && k == half);
        const cd v = edge ? two[k] : 2.0 * two[k];
        if constexpr (std::is_same_v<V, double>) out[k] = v.real();
        else out[k] = v;
    }
}

// FFT order -> ascending frequencies [-fs/2, fs/2).
template <class V>
void shift_two(const std::vector<cd>& two, double fs, std::vector<double>& freq, std::vector<V>& out) {
    const std::size_t n = two.size();
    freq.resize(n);
    out.resize(n);
    const std::size_t neg = n / 2;  // number of negative-frequency bins
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = (i + n - neg) % n;
        const double kk = k >= n - neg ? static_cast<double>(k) - static_cast<double>(n) : static_cast<double>(k);
        freq[i] = fs * kk / static_cast<double>(n);
        if constexpr (std::is_same_v<V, double>) out[i] = two[k].real();
        else out[i] = two[k];
    }
}

}  // namespace

RealSpectrum welch_psd(const std::vector<double>& x, double fs, const WelchOptions& opt) {
    RealSpectrum s;
    const auto two = averaged(x, static_cast<const std::vector<double>*>(nullptr), fs, opt, s.meta);
    fold_single(two, fs, s.freq_hz, s.values);
    return s;
}

RealSpectrum welch_psd(const std::vector<cd>& x, double fs, const WelchOptions& opt) {
    RealSpectrum s;
    const auto two = averaged(x, static_cast<const std::vector<cd>*>(nullptr), fs, opt, s.meta);
    s.meta.two_sided = true;
    shift_two(two, fs, s.freq_hz, s.values);
    return s;
}

ComplexSpectrum welch_csd(const std::vector<double>& x, const std::vector<double>& y, double fs,
                          const WelchOptions& opt) {
    ComplexSpectrum s;
    const auto two = averaged(x, &y, fs, opt, s.meta);
    fold_single(two, fs, s.freq_hz, s.values);
    return s;
}

ComplexSpectrum welch_csd(const std::vector<cd>& x, const std::vector<cd>& y, double fs, const WelchOptions& opt) {
    ComplexSpectrum s;
    const auto two = averaged(x, &y, fs, opt, s.meta);
    s.meta.two_sided = true;
    shift_two(two, fs, s.freq_hz, s.values);
    return s;
}

ComplexSpectrum estimate_tf(const std::vector<cd>& h, const std::vector<cd>& b, double fs, const WelchOptions& opt,
                            double floor, Masked* masked) {
    const RealSpectrum shh = welch_psd(h, fs, opt);
    ComplexSpectrum t = welch_csd(h, b, fs, opt);
    std::vector<double> sorted = shh.values;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    const double thresh = floor * sorted[sorted.size() / 2];
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (shh.values[k] > thresh && shh.values[k] > 0) {
            t.values[k] /= shh.values[k];
        } else {
            t.values[k] = {nan, nan};
            if (masked) masked->bins.push_back(k);
        }
    }
    return t;
}

RealSpectrum strain_refer(const RealSpectrum& S_bb, const ComplexSpectrum& T, double floor, Masked* masked) {
    if (S_bb.size() != T.size()) throw std::invalid_argument("strain_refer: grids differ");
    RealSpectrum out = S_bb;
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (std::abs(S_bb.freq_hz[k] - T.freq_hz[k]) > 1e-9 * std::max(1.0, std::abs(T.freq_hz[k])))
            throw std::invalid_argument("strain_refer: grids differ");
        const double mag = std::abs(T.values[k]);
        if (!(mag > floor) || mag == 0) {
            out.values[k] = nan;
            if (masked) masked->bins.push_back(k);
        } else {
            out.values[k] = S_bb.values[k] / (mag * mag);
        }
    }
    return out;
}

std::size_t nearest_bin(const std::vector<double>& freq_hz, double f) {
    if (freq_hz.empty()) throw std::invalid_argument("nearest_bin: empty grid");
    const auto it = std::lower_bound(freq_hz.begin(), freq_hz.end(), f);
    if (it == freq_hz.begin()) return 0;
    if (it == freq_hz.end()) return freq_hz.size() - 1;
    const std::size_t i = static_cast<std::size_t>(it - freq_hz.begin());
    return (f - freq_hz[i - 1] <= freq_hz[i] - f) ? i - 1 : i;
}

}  // namespace wlc::spectral
