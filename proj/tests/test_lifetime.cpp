#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "hbt/errors.hpp"
#include "hbt/lifetime.hpp"
#include "hbt/rng.hpp"
#include "hbt/time.hpp"

using namespace hbt;

namespace {

// Independent oracle: direct numerical convolution of the unit Gaussian
// (sigma, centered at t0) with the unit exponential (tau), evaluated by
// composite Gauss-Legendre quadrature over the exponential's support.
double emg_oracle(double t, double t0, double sigma, double tau) {
    static const double gl_x[8] = {-0.9602898564975363, -0.7966664774136267,
                                   -0.5255324099163290, -0.1834346424956498,
                                   0.1834346424956498,  0.5255324099163290,
                                   0.7966664774136267,  0.9602898564975363};
    static const double gl_w[8] = {0.1012285362903763, 0.2223810344533745,
                                   0.3137066458778873, 0.3626837833783620,
                                   0.3626837833783620, 0.3137066458778873,
                                   0.2223810344533745, 0.1012285362903763};
    // integrand: (1/tau) exp(-s/tau) * N(t - t0 - s; sigma), s >= 0.
    // Restrict to where both factors are non-negligible so the composite
    // rule resolves the integrand.
    const double lo = std::max(0.0, t - t0 - 12.0 * sigma);
    const double hi = std::min(t - t0 + 12.0 * sigma, lo + 60.0 * tau);
    if (hi <= lo) return 0.0;
    const int segments = 400;
    const double seg = (hi - lo) / segments;
    const double inv_norm = 1.0 / (sigma * std::sqrt(2.0 * 3.141592653589793));
    double sum = 0;
    for (int k = 0; k < segments; ++k) {
        const double mid = lo + (k + 0.5) * seg;
        for (int q = 0; q < 8; ++q) {
            const double s = mid + 0.5 * seg * gl_x[q];
            const double z = (t - t0 - s) / sigma;
            sum += gl_w[q] * 0.5 * seg * (1.0 / tau) * std::exp(-s / tau) * inv_norm *
                   std::exp(-0.5 * z * z);
        }
    }
    return sum;
}

Histogram sample_emg(double t0, double sigma, double tau, std::size_t n_counts,
                     double bg_per_bin, TimePs bin, TimePs range, std::uint64_t seed) {
    Histogram h(0, bin, static_cast<std::size_t>(range / bin));
    RngStream rng(seed, "emg-sample");
    for (std::size_t i = 0; i < n_counts; ++i) {
        const double t = t0 + rng.gaussian(0.0, sigma) + rng.exponential(tau);
        h.add(round_to_ps(t));
    }
    if (bg_per_bin > 0) {
        for (std::size_t i = 0; i < h.size(); ++i) {
            h.set_count(i, h.count(i) + rng.poisson(bg_per_bin));
        }
    }
    return h;
}

}  // namespace

TEST_CASE("emg matches the quadrature oracle to 1e-8") {
    RngStream rng(101, "emg-pts");
    for (int i = 0; i < 50; ++i) {
        const double t0 = 500.0 + 4000.0 * rng.uniform();
        const double sigma = 5.0 + 200.0 * rng.uniform();
        const double tau = 50.0 + 1500.0 * rng.uniform();
        const double t = t0 - 3.0 * sigma + (8.0 * sigma + 5.0 * tau) * rng.uniform();
        const double got = emg_value(t, t0, sigma, tau, 1.0, 0.0);
        const double want = emg_oracle(t, t0, sigma, tau);
        if (want > 1e-300)
            CHECK(std::abs(got - want) / want <= 1e-8);
    }
}

TEST_CASE("emg sigma->0 limit is the pure exponential") {
    const double tau = 400.0, t0 = 1000.0;
    const double sigma = tau * 1e-6;
    for (double dt : {50.0, 200.0, 800.0, 2500.0}) {
        const double got = emg_value(t0 + dt, t0, sigma, tau, 1.0, 0.0);
        const double want = std::exp(-dt / tau) / tau;
        CHECK(got == doctest::Approx(want).epsilon(1e-6));
    }
    CHECK(emg_value(t0 - 50.0, t0, sigma, tau, 1.0, 0.0) < 1e-12);
}

TEST_CASE("emg integrates to its amplitude") {
    const double t0 = 2000.0, sigma = 28.88, tau = 400.0, A = 5000.0;
    double integral = 0;
    const double lo = t0 - 10.0 * sigma, hi = t0 + 40.0 * tau;
    const int n = 200000;
    const double step = (hi - lo) / n;
    for (int i = 0; i < n; ++i) {
        const double t = lo + (i + 0.5) * step;
        integral += step * (emg_value(t, t0, sigma, tau, A, 7.0) - 7.0);
    }
    CHECK(integral == doctest::Approx(A).epsilon(1e-4));
}

TEST_CASE("emg is numerically stable for extreme sigma/tau ratios") {
    // sigma/tau = 1000: the naive exp(sigma^2/2tau^2) overflows
    const double v = emg_value(0.0, 0.0, 1000.0, 1.0, 1.0, 0.0);
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
    const double w = emg_oracle(0.0, 0.0, 1000.0, 1.0);
    CHECK(v == doctest::Approx(w).epsilon(1e-7));
}

TEST_CASE("emg parameter validation") {
    CHECK_THROWS_AS(emg_value(0, 0, 0.0, 400, 1, 0), Error);
    CHECK_THROWS_AS(emg_value(0, 0, 28.9, 0.0, 1, 0), Error);
}

TEST_CASE("deviance gradient matches central finite differences") {
    Histogram h = sample_emg(1000.0, 28.88, 400.0, 100000, 2.0, 4, 6000, 31);
    RngStream rng(32, "grad-pts");
    for (int pt = 0; pt < 20; ++pt) {
        std::vector<double> th = {
            900.0 + 200.0 * rng.uniform(),           // t0
            std::log(20.0 + 20.0 * rng.uniform()),   // ln sigma
            std::log(300.0 + 200.0 * rng.uniform()), // ln tau
            std::log(5e4 + 1e5 * rng.uniform()),     // ln A
            std::log(0.5 + 4.0 * rng.uniform()),     // ln B
        };
        std::vector<double> grad;
        emg_deviance(h, th, &grad);
        for (std::size_t j = 0; j < th.size(); ++j) {
            const double step = 1e-6 * (1.0 + std::abs(th[j]));
            auto thp = th, thm = th;
            thp[j] += step;
            thm[j] -= step;
            const double fd = (emg_deviance(h, thp) - emg_deviance(h, thm)) / (2.0 * step);
            const double scale = std::max({std::abs(fd), std::abs(grad[j]), 1e-3});
            CHECK(std::abs(grad[j] - fd) / scale <= 1e-5);
        }
    }
}

TEST_CASE("fit_irf recovers a 68 ps FWHM at a million counts") {
    Histogram h(0, 4, 1000);
    RngStream rng(41, "irf");
    const double sigma = 28.88, t0 = 2000.0;
    for (int i = 0; i < 1000000; ++i) h.add(round_to_ps(rng.gaussian(t0, sigma)));
    IrfFit fit = fit_irf(h);
    CHECK(fit.fwhm_ps == doctest::Approx(68.0).epsilon(0.02));
    CHECK(fit.t0_ps == doctest::Approx(t0).epsilon(0.001));
    CHECK_FALSE(fit.degenerate);
    CHECK(fit.goodness < 2.0);
}

TEST_CASE("fit_irf flags a flat histogram as degenerate") {
    Histogram h(0, 4, 500);
    RngStream rng(42, "flat");
    for (std::size_t i = 0; i < h.size(); ++i) h.set_count(i, 20 + rng.next_u64() % 5);
    IrfFit fit = fit_irf(h);
    CHECK(fit.degenerate);
}

TEST_CASE("fit_irf precision scales as one over sqrt of counts") {
    const double sigma = 28.88, t0 = 2000.0;
    std::vector<double> errs;
    for (std::size_t n : {10000u, 100000u, 1000000u}) {
        Histogram h(0, 4, 1000);
        RngStream rng(43, "scale");
        for (std::size_t i = 0; i < n; ++i) h.add(round_to_ps(rng.gaussian(t0, sigma)));
        IrfFit fit = fit_irf(h);
        errs.push_back(std::abs(fit.sigma_ps - sigma));
    }
    // each decade of counts should reduce the error; allow slack for noise
    CHECK(errs[2] < errs[0]);
    CHECK(errs[2] < 0.3);
}

TEST_CASE("fit_lifetime recovers tau with a fixed IRF sigma") {
    Histogram h = sample_emg(1000.0, 28.88, 400.0, 1000000, 1.0, 4, 6000, 44);
    LifetimeFit fit = fit_lifetime(h, 28.88);
    CHECK(fit.tau_ps == doctest::Approx(400.0).epsilon(0.02));
    CHECK(fit.sigma_fixed);
    CHECK_FALSE(fit.tau_at_bound);
    CHECK(fit.tau_err_ps > 0.0);
    CHECK(fit.tau_err_ps < 5.0);
}

TEST_CASE("fixed and floating sigma agree") {
    Histogram h = sample_emg(1000.0, 28.88, 400.0, 1000000, 1.0, 4, 6000, 45);
    LifetimeFit fixed = fit_lifetime(h, 28.88);
    LifetimeFit floating = fit_lifetime(h);
    const double comb =
        std::sqrt(fixed.tau_err_ps * fixed.tau_err_ps +
                  floating.tau_err_ps * floating.tau_err_ps);
    CHECK(std::abs(fixed.tau_ps - floating.tau_ps) <= std::max(comb, 1.0));
    CHECK(floating.sigma_irf_ps == doctest::Approx(28.88).epsilon(0.1));
}

TEST_CASE("zero-jitter decay is recovered within 1 percent") {
    Histogram h(0, 4, 1500);
    RngStream rng(46, "pure-exp");
    for (int i = 0; i < 1000000; ++i) h.add(round_to_ps(200.0 + rng.exponential(400.0)));
    LifetimeFit fit = fit_lifetime(h);
    CHECK(fit.tau_ps == doctest::Approx(400.0).epsilon(0.01));
}

TEST_CASE("fit is invariant under time-axis translation") {
    Histogram h = sample_emg(1000.0, 28.88, 400.0, 200000, 1.0, 4, 6000, 47);
    const TimePs shift = 250000;
    Histogram hs(h.origin() + shift, h.bin_width(), h.size());
    for (std::size_t i = 0; i < h.size(); ++i) hs.set_count(i, h.count(i));

    LifetimeFit f0 = fit_lifetime(h, 28.88);
    LifetimeFit f1 = fit_lifetime(hs, 28.88);
    CHECK(std::abs(f1.tau_ps - f0.tau_ps) / f0.tau_ps <= 1e-6);
    CHECK(std::abs((f1.t0_ps - shift) - f0.t0_ps) / std::abs(f0.t0_ps) <= 1e-6);
    CHECK(std::abs(f1.amplitude - f0.amplitude) / f0.amplitude <= 1e-6);

    IrfFit g0 = fit_irf(h);  // EMG data, but translation must still commute
    IrfFit g1 = fit_irf(hs);
    CHECK(std::abs((g1.t0_ps - shift) - g0.t0_ps) / std::abs(g0.t0_ps) <= 1e-6);
    CHECK(std::abs(g1.sigma_ps - g0.sigma_ps) / g0.sigma_ps <= 1e-6);
}

TEST_CASE("confidence interval coverage near 68 percent") {
    const double true_tau = 400.0;
    int covered = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        Histogram h = sample_emg(1000.0, 28.88, true_tau, 100000, 1.0, 8, 6000, 900 + seed);
        LifetimeFit fit = fit_lifetime(h, 28.88);
        if (fit.tau_err_ps <= 0) continue;
        ++total;
        if (std::abs(fit.tau_ps - true_tau) <= fit.tau_err_ps) ++covered;
    }
    REQUIRE(total >= 490);
    const double frac = static_cast<double>(covered) / total;
    CHECK(frac > 0.63);
    CHECK(frac < 0.73);
}

TEST_CASE("fwhm_of_histogram on exact Gaussian bins") {
    Histogram h(0, 100, 200);
    const double sigma = 1000.0, t0 = 10000.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double z = (h.bin_center(i) - t0) / sigma;
        h.set_count(i, static_cast<std::uint64_t>(10000.0 * std::exp(-0.5 * z * z)));
    }
    CHECK(fwhm_of_histogram(h) == doctest::Approx(2354.8).epsilon(50.0 / 2354.8));
}

TEST_CASE("fwhm_of_histogram edge cases") {
    // a one-bin spike is resolution limited: exactly one bin width
    Histogram spike(0, 100, 50);
    spike.set_count(25, 1000);
    CHECK(fwhm_of_histogram(spike) == doctest::Approx(100.0));

    // too weak a peak over the baseline
    Histogram weak(0, 100, 50);
    weak.set_count(25, 15);
    CHECK_THROWS_AS(fwhm_of_histogram(weak), Error);

    Histogram tiny(0, 100, 2);
    CHECK_THROWS_AS(fwhm_of_histogram(tiny), Error);
}

TEST_CASE("fit_irf requires enough populated bins") {
    Histogram h(0, 4, 20);
    h.set_count(3, 100);
    h.set_count(4, 200);
    CHECK_THROWS_AS(fit_irf(h), Error);
}
