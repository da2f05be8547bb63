#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "hepot/spectral.hpp"

using namespace hepot::spectral;

namespace {

// O(n^2) DFT, kept deliberately naive.
std::vector<double> naive_power(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> p(n / 2 + 1);
    for (std::size_t k = 0; k < p.size(); ++k) {
        std::complex<double> s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * double(k) * double(i) / double(n));
        p[k] = std::norm(s);
    }
    return p;
}

}  // namespace

TEST(PowerSpectrum, MatchesNaiveDft) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    for (std::size_t n : {1u, 2u, 7u, 64u, 251u}) {
        std::vector<double> x(n);
        for (double& v : x) v = n01(rng);
        auto fast = power_spectrum(x);
        auto slow = naive_power(x);
        ASSERT_EQ(fast.size(), slow.size());
        for (std::size_t k = 0; k < fast.size(); ++k) EXPECT_NEAR(fast[k], slow[k], 1e-9 * (1 + slow[k]));
    }
}

TEST(Periodogram, ParsevalWithoutWindow) {
    // Rectangular window, mean removed: integral of the one-sided density equals the variance.
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n01;
    for (std::size_t n : {128u, 129u}) {
        std::vector<double> x(n);
        for (double& v : x) v = 2.0 * n01(rng) + 1.0;
        double mean = 0;
        for (double v : x) mean += v;
        mean /= double(n);
        double var = 0;
        for (double v : x) var += (v - mean) * (v - mean);
        var /= double(n);
        auto pg = periodogram(x, 50.0, {.hann = false, .remove_mean = true});
        double total = 0;
        for (double v : pg.power) total += v * pg.df;
        EXPECT_NEAR(total, var, 1e-9 * var);
    }
}

TEST(Periodogram, SinusoidPeaksAtItsFrequency) {
    const double fs = 4.0;
    std::vector<double> x(1200);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * std::numbers::pi * 0.25 * double(i) / fs);
    auto pg = periodogram(x, fs);
    std::size_t best = 0;
    for (std::size_t k = 1; k < pg.power.size(); ++k)
        if (pg.power[k] > pg.power[best]) best = k;
    EXPECT_NEAR(pg.frequency(best), 0.25, pg.df);
    // unit-amplitude sine has variance 0.5
    EXPECT_NEAR(pg.band_power(0.2, 0.3), 0.5, 0.02);
}

TEST(Periodogram, RejectsDegenerateInput) {
    std::vector<double> one{1.0};
    EXPECT_THROW(periodogram(one, 1.0), hepot::InsufficientDataError);
    std::vector<double> two{1.0, 2.0};
    EXPECT_THROW(periodogram(two, 0.0), hepot::DomainError);
}
