#pragma once

#include <optional>
#include <vector>

#include "hbt/histogram.hpp"
#include "hbt/time.hpp"

namespace hbt {

// Exponentially modified Gaussian: closed-form convolution of a Gaussian IRF
// (sigma, centered at t0) with an exponential decay (tau), scaled by
// `amplitude` (total counts in the decay) on top of a flat `background`
// (counts per unit time is not used here; background is per evaluation).
// Numerically stable via the scaled complementary error function.
double emg_value(double t, double t0, double sigma, double tau, double amplitude,
                 double background);

// Mean standardized (Pearson) residual of the fit, grouped by decade of the
// model expectation. Lets the dynamic-range claim of a fit be checked.
struct DecadeResidual {
    int decade = 0;        // floor(log10(model counts per bin))
    std::size_t n_bins = 0;
    double mean_pearson = 0;
};

struct IrfFit {
    double t0_ps = 0;
    double sigma_ps = 0;
    double fwhm_ps = 0;
    double amplitude = 0;   // total counts above background
    double background = 0;  // counts per bin
    std::vector<double> covariance;  // row-major 4x4 over (t0, sigma, amplitude, background)
    double deviance = 0;
    double goodness = 0;  // deviance per degree of freedom
    bool degenerate = false;
    std::vector<DecadeResidual> per_decade;
    double decades_of_fit = 0;
    int iterations = 0;
};

struct LifetimeFit {
    double tau_ps = 0;
    double tau_err_ps = 0;
    double t0_ps = 0;
    double sigma_irf_ps = 0;
    bool sigma_fixed = false;
    double amplitude = 0;
    double background = 0;
    std::vector<double> covariance;  // row-major over free parameters
    double deviance = 0;
    double goodness = 0;
    bool tau_at_bound = false;
    std::vector<DecadeResidual> per_decade;
    double decades_of_fit = 0;
    int iterations = 0;
};

// Poisson maximum-likelihood fit of a Gaussian plus flat background,
// bin-integrated. Quasi-Newton on the deviance with log transforms for the
// positive parameters; multistart from heuristic initializations.
IrfFit fit_irf(const Histogram& h);

// Poisson MLE of the EMG model. If fix_sigma_ps is given (typically from a
// prior fit_irf), sigma is held fixed for the deconvolution workflow.
LifetimeFit fit_lifetime(const Histogram& h, std::optional<double> fix_sigma_ps = std::nullopt);

// Model-free FWHM: linear interpolation between the bins crossing half of
// (max - baseline); baseline is the median of the outer 10% of bins.
double fwhm_of_histogram(const Histogram& h);

// Poisson deviance of the bin-integrated EMG model and, when grad is given,
// its analytic gradient over the optimizer's transformed parameters
// (t0, ln sigma, ln tau, ln amplitude, ln background). Exposed so the
// gradient can be checked against finite differences.
double emg_deviance(const Histogram& h, const std::vector<double>& theta,
                    std::vector<double>* grad = nullptr);

}  // namespace hbt
