#pragma once

#include <cstddef>
#include <vector>

namespace hbt {

// Scaled complementary error function exp(x^2)*erfc(x), finite for all x
// where exp(x^2)*erfc(x) is (large negative x overflows, as the true value
// does).
double erfcx(double x);

double normal_pdf(double z);  // standard normal density
double normal_cdf(double z);  // standard normal CDF

// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi2_sf(double chi2, double dof);

// Kolmogorov-Smirnov statistic of a sample against Uniform(0,1).
double ks_uniform_statistic(std::vector<double> sample);

// Nodes and weights for 8-point Gauss-Legendre on [-1, 1].
struct GaussLegendre8 {
    static const double nodes[8];
    static const double weights[8];
};

}  // namespace hbt
