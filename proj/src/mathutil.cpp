#include "hbt/mathutil.hpp"

#include <algorithm>
#include <cmath>

namespace hbt {

namespace {

// Asymptotic continued fraction for erfcx, valid for large positive x.
double erfcx_cf(double x) {
    // erfcx(x) = 1/sqrt(pi) * 1/(x + 1/(2x + 2/(x + 3/(2x + ...))))
    double cf = 0.0;
    for (int k = 24; k >= 1; --k) {
        double num = 0.5 * k;
        cf = num / (x + cf);
    }
    return (1.0 / 1.7724538509055160273) / (x + cf);
}

}  // namespace

double erfcx(double x) {
    if (x >= 6.0) return erfcx_cf(x);
    if (x >= 0.0) return std::exp(x * x) * std::erfc(x);
    // erfcx(-x) = 2*exp(x^2) - erfcx(x); overflows below x ~ -26.6 just as
    // the exact value does.
    double e = std::exp(x * x);
    if (x <= -6.0) return 2.0 * e - erfcx_cf(-x);
    return 2.0 * e - std::exp(x * x) * std::erfc(-x);
}

double normal_pdf(double z) {
    return 0.3989422804014327 * std::exp(-0.5 * z * z);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z * 0.7071067811865476);
}

double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) return 0.0;
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) {
        // series representation
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    return 1.0 - gamma_q(a, x);
}

double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p(a, x);
    // Lentz continued fraction
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double chi2_sf(double chi2, double dof) {
    if (chi2 <= 0.0) return 1.0;
    return gamma_q(0.5 * dof, 0.5 * chi2);
}

double ks_uniform_statistic(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const std::size_t n = sample.size();
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double lo = static_cast<double>(i) / n;
        double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(sample[i] - lo, hi - sample[i]));
    }
    return d;
}

const double GaussLegendre8::nodes[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};

const double GaussLegendre8::weights[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

}  // namespace hbt
