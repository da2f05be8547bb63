#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include <fftw3.h>

#include "hepot/errors.hpp"

namespace hepot::spectral {

namespace detail {

// The FFTW planner is not re-entrant; execution is.
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

}  // namespace detail

/// Magnitude-squared DFT of a real sequence, bins 0..n/2.
inline std::vector<double> power_spectrum(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    const std::size_t bins = n / 2 + 1;
    std::unique_ptr<double, detail::FftwFree> in(fftw_alloc_real(n));
    std::unique_ptr<fftw_complex, detail::FftwFree> out(fftw_alloc_complex(bins));
    fftw_plan plan;
    {
        std::lock_guard lock(detail::planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
    }
    std::copy(x.begin(), x.end(), in.get());
    fftw_execute(plan);
    std::vector<double> p(bins);
    for (std::size_t k = 0; k < bins; ++k)
        p[k] = out.get()[k][0] * out.get()[k][0] + out.get()[k][1] * out.get()[k][1];
    {
        std::lock_guard lock(detail::planner_mutex());
        fftw_destroy_plan(plan);
    }
    return p;
}

inline std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (n < 2) return w;
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(n - 1));
    return w;
}

struct Periodogram {
    double df = 0.0;            // bin spacing (Hz)
    std::vector<double> power;  // one-sided PSD, bin k at frequency k * df

    double frequency(std::size_t k) const { return static_cast<double>(k) * df; }

    /// Rectangle-rule integral over bins with lo <= f < hi.
    double band_power(double lo, double hi) const {
        double s = 0.0;
        for (std::size_t k = 0; k < power.size(); ++k) {
            const double f = frequency(k);
            if (f >= lo && f < hi) s += power[k] * df;
        }
        return s;
    }
};

struct PeriodogramOptions {
    bool hann = true;
    bool remove_mean = true;
};

/// One-sided power spectral density estimate, density-scaled so that the
/// integral over frequency approximates the (windowed) signal variance.
inline Periodogram periodogram(std::span<const double> x, double fs, PeriodogramOptions opt = {}) {
    if (!(fs > 0.0)) throw DomainError("periodogram: sample rate must be positive");
    const std::size_t n = x.size();
    if (n < 2) throw InsufficientDataError("periodogram needs at least 2 samples");
    double mean = 0.0;
    if (opt.remove_mean) {
        for (double v : x) mean += v;
        mean /= static_cast<double>(n);
    }
    const auto w = opt.hann ? hann_window(n) : std::vector<double>(n, 1.0);
    std::vector<double> buf(n);
    double wss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        buf[i] = (x[i] - mean) * w[i];
        wss += w[i] * w[i];
    }
    auto p = power_spectrum(buf);
    const double scale = 1.0 / (fs * wss);
    for (std::size_t k = 0; k < p.size(); ++k) {
        p[k] *= scale;
        const bool unpaired = (k == 0) || (n % 2 == 0 && k == n / 2);
        if (!unpaired) p[k] *= 2.0;
    }
    return {fs / static_cast<double>(n), std::move(p)};
}

}  // namespace hepot::spectral
