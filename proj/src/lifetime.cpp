#include "hbt/lifetime.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "hbt/errors.hpp"
#include "hbt/mathutil.hpp"

namespace hbt {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kTwoOverSqrtPi = 1.1283791670955126;
// Numerical floor added to every bin expectation so the Poisson log term
// stays finite; part of the model, so gradients remain exact.
constexpr double kMuFloor = 1e-12;

struct EmgEval {
    double f = 0;        // unit-normalized EMG density
    double dlnf_t0 = 0;  // partial derivatives of ln f
    double dlnf_sigma = 0;
    double dlnf_tau = 0;
};

EmgEval emg_density(double t, double t0, double sigma, double tau) {
    EmgEval e;
    const double d = (t - t0) / sigma;
    const double z = kInvSqrt2 * (sigma / tau - d);
    double h;  // d ln(erfc term)/dz
    if (z >= 0) {
        const double ex = erfcx(z);
        e.f = 0.5 / tau * std::exp(-0.5 * d * d) * ex;
        h = -kTwoOverSqrtPi / ex;
    } else {
        // exponent a = sigma^2/(2 tau^2) - (t-t0)/tau is negative whenever z < 0
        const double a = 0.5 * sigma * sigma / (tau * tau) - (t - t0) / tau;
        const double ec = std::erfc(z);  // in (1, 2)
        e.f = 0.5 / tau * std::exp(a) * ec;
        h = -kTwoOverSqrtPi * std::exp(-z * z) / ec;
    }
    if (e.f > 0 && std::isfinite(e.f)) {
        e.dlnf_t0 = 1.0 / tau + h * kInvSqrt2 / sigma;
        e.dlnf_sigma = sigma / (tau * tau) + h * kInvSqrt2 * (1.0 / tau + d / sigma);
        e.dlnf_tau = -1.0 / tau - sigma * sigma / (tau * tau * tau) + (t - t0) / (tau * tau) -
                     h * kInvSqrt2 * sigma / (tau * tau);
    } else {
        e.f = 0;
    }
    return e;
}

// ---------------------------------------------------------------------------
// Binned Poisson models over transformed parameters. Layouts:
//   Gaussian:        (t0, ln sigma, ln A, ln B)
//   EMG, sigma free: (t0, ln sigma, ln tau, ln A, ln B)
//   EMG, sigma fixed:(t0, ln tau, ln A, ln B)
// ---------------------------------------------------------------------------

struct ModelEval {
    std::vector<double> mu;    // n_bins
    std::vector<double> dmu;   // n_bins x n_free, row-major
};

enum class ModelKind { gaussian, emg };

struct Model {
    ModelKind kind;
    std::optional<double> fixed_sigma;

    std::size_t n_free() const {
        if (kind == ModelKind::gaussian) return 4;
        return fixed_sigma ? 4 : 5;
    }

    void eval(const Histogram& h, const std::vector<double>& th, ModelEval& out) const {
        const std::size_t nb = h.size();
        const std::size_t np = n_free();
        out.mu.assign(nb, 0.0);
        out.dmu.assign(nb * np, 0.0);

        if (kind == ModelKind::gaussian) {
            const double t0 = th[0], sg = std::exp(th[1]), A = std::exp(th[2]),
                         B = std::exp(th[3]);
            for (std::size_t i = 0; i < nb; ++i) {
                const double e0 = static_cast<double>(h.bin_start(i));
                const double e1 = e0 + static_cast<double>(h.bin_width());
                const double z0 = (e0 - t0) / sg, z1 = (e1 - t0) / sg;
                const double p = normal_cdf(z1) - normal_cdf(z0);
                const double f0 = normal_pdf(z0), f1 = normal_pdf(z1);
                out.mu[i] = A * p + B + kMuFloor;
                double* g = &out.dmu[i * np];
                g[0] = A * (f0 - f1) / sg;            // d/dt0
                g[1] = A * (z0 * f0 - z1 * f1);       // d/d ln sigma
                g[2] = A * p;                         // d/d ln A
                g[3] = B;                             // d/d ln B
            }
            return;
        }

        // EMG: 8-point Gauss-Legendre bin integration of the density and of
        // its analytic parameter derivatives (same quadrature, so the
        // deviance gradient is exact for the discretized objective).
        const bool fixed = fixed_sigma.has_value();
        const double t0 = th[0];
        const double sg = fixed ? *fixed_sigma : std::exp(th[1]);
        const double tau = std::exp(th[fixed ? 1 : 2]);
        const double A = std::exp(th[fixed ? 2 : 3]);
        const double B = std::exp(th[fixed ? 3 : 4]);
        for (std::size_t i = 0; i < nb; ++i) {
            const double e0 = static_cast<double>(h.bin_start(i));
            const double w = static_cast<double>(h.bin_width());
            const double mid = e0 + 0.5 * w, half = 0.5 * w;
            double p = 0, dp_t0 = 0, dp_sg = 0, dp_tau = 0;
            for (int q = 0; q < 8; ++q) {
                const double t = mid + half * GaussLegendre8::nodes[q];
                const EmgEval ev = emg_density(t, t0, sg, tau);
                if (ev.f <= 0) continue;
                const double wf = GaussLegendre8::weights[q] * half * ev.f;
                p += wf;
                dp_t0 += wf * ev.dlnf_t0;
                dp_sg += wf * ev.dlnf_sigma;
                dp_tau += wf * ev.dlnf_tau;
            }
            out.mu[i] = A * p + B + kMuFloor;
            double* g = &out.dmu[i * np];
            std::size_t j = 0;
            g[j++] = A * dp_t0;
            if (!fixed) g[j++] = A * dp_sg * sg;  // d/d ln sigma
            g[j++] = A * dp_tau * tau;            // d/d ln tau
            g[j++] = A * p;                       // d/d ln A
            g[j++] = B;                           // d/d ln B
        }
    }
};

double deviance_and_grad(const Model& model, const Histogram& h, const std::vector<double>& th,
                         std::vector<double>* grad, ModelEval& scratch) {
    model.eval(h, th, scratch);
    const std::size_t np = model.n_free();
    if (grad) grad->assign(np, 0.0);
    double dev = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double n = static_cast<double>(h.count(i));
        const double m = scratch.mu[i];
        dev += 2.0 * (m - n);
        if (n > 0) dev += 2.0 * n * std::log(n / m);
        if (grad) {
            const double c = 2.0 * (1.0 - (n > 0 ? n / m : 0.0));
            const double* g = &scratch.dmu[i * np];
            for (std::size_t j = 0; j < np; ++j) (*grad)[j] += c * g[j];
        }
    }
    return dev;
}

struct Bounds {
    std::vector<double> lo, hi;
    void clamp(std::vector<double>& th) const {
        for (std::size_t j = 0; j < th.size(); ++j) th[j] = std::clamp(th[j], lo[j], hi[j]);
    }
};

struct OptResult {
    std::vector<double> th;
    double deviance = 0;
    int iterations = 0;
    bool converged = false;
    std::string trace;
};

OptResult bfgs_minimize(const Model& model, const Histogram& h, std::vector<double> th,
                        const Bounds& bounds, int max_iter = 400) {
    const std::size_t n = th.size();
    ModelEval scratch;
    std::vector<double> g(n), g_new(n), d(n), th_new(n);
    std::vector<double> H(n * n, 0.0);  // inverse-Hessian approximation
    for (std::size_t i = 0; i < n; ++i) H[i * n + i] = 1.0;

    bounds.clamp(th);
    double D = deviance_and_grad(model, h, th, &g, scratch);
    OptResult res;
    int stall = 0;

    int it = 0;
    for (; it < max_iter; ++it) {
        // convergence on gradient
        double gmax = 0;
        for (double v : g) gmax = std::max(gmax, std::abs(v));
        if (gmax < 1e-8 * (1.0 + std::abs(D))) {
            res.converged = true;
            break;
        }

        // direction d = -H g
        double dg = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < n; ++j) s += H[i * n + j] * g[j];
            d[i] = -s;
        }
        for (std::size_t i = 0; i < n; ++i) dg += d[i] * g[i];
        if (!(dg < 0)) {  // reset to steepest descent
            for (std::size_t i = 0; i < n * n; ++i) H[i] = 0;
            for (std::size_t i = 0; i < n; ++i) {
                H[i * n + i] = 1.0;
                d[i] = -g[i];
            }
            dg = 0;
            for (std::size_t i = 0; i < n; ++i) dg += d[i] * g[i];
            if (!(dg < 0)) break;
        }

        // backtracking Armijo line search
        double step = 1.0;
        double D_new = D;
        bool ok = false;
        for (int ls = 0; ls < 50; ++ls) {
            for (std::size_t i = 0; i < n; ++i) th_new[i] = th[i] + step * d[i];
            bounds.clamp(th_new);
            D_new = deviance_and_grad(model, h, th_new, &g_new, scratch);
            if (std::isfinite(D_new) && D_new <= D + 1e-4 * step * dg) {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if (!ok) {
            res.converged = gmax < 1e-4 * (1.0 + std::abs(D));
            break;
        }

        // BFGS inverse update with s = th_new - th, y = g_new - g
        std::vector<double> s(n), y(n);
        double sy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = th_new[i] - th[i];
            y[i] = g_new[i] - g[i];
            sy += s[i] * y[i];
        }
        if (sy > 1e-14) {
            std::vector<double> Hy(n, 0.0);
            double yHy = 0;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) Hy[i] += H[i * n + j] * y[j];
            }
            for (std::size_t i = 0; i < n; ++i) yHy += y[i] * Hy[i];
            const double c1 = (sy + yHy) / (sy * sy);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    H[i * n + j] += c1 * s[i] * s[j] -
                                    (Hy[i] * s[j] + s[i] * Hy[j]) / sy;
                }
            }
        }

        const double dD = std::abs(D - D_new);
        th = th_new;
        g = g_new;
        D = D_new;
        if (dD < 1e-12 * (1.0 + std::abs(D))) {
            if (++stall >= 3) {
                res.converged = true;
                break;
            }
        } else {
            stall = 0;
        }
    }

    res.th = th;
    res.deviance = D;
    res.iterations = it;
    if (!res.converged && it >= max_iter) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "iteration cap %d reached, deviance=%.6g", max_iter, D);
        res.trace = buf;
    }
    return res;
}

// FD Hessian of the deviance from the analytic gradient; covariance of the
// transformed parameters is 2 * H^-1 (deviance = 2 * negative log-likelihood).
bool covariance_from_hessian(const Model& model, const Histogram& h,
                             const std::vector<double>& th, std::vector<double>& cov) {
    const std::size_t n = th.size();
    ModelEval scratch;
    std::vector<double> hess(n * n, 0.0);
    std::vector<double> gp(n), gm(n), thp(th), thm(th);
    for (std::size_t j = 0; j < n; ++j) {
        const double step = 1e-5 * (1.0 + std::abs(th[j]));
        thp = th;
        thm = th;
        thp[j] += step;
        thm[j] -= step;
        deviance_and_grad(model, h, thp, &gp, scratch);
        deviance_and_grad(model, h, thm, &gm, scratch);
        for (std::size_t i = 0; i < n; ++i) hess[i * n + j] = (gp[i] - gm[i]) / (2.0 * step);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (hess[i * n + j] + hess[j * n + i]);
            hess[i * n + j] = hess[j * n + i] = v;
        }

    // Gauss-Jordan inversion
    std::vector<double> inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(hess[r * n + col]) > std::abs(hess[piv * n + col])) piv = r;
        if (std::abs(hess[piv * n + col]) < 1e-300) return false;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(hess[piv * n + c], hess[col * n + c]);
                std::swap(inv[piv * n + c], inv[col * n + c]);
            }
        }
        const double p = hess[col * n + col];
        for (std::size_t c = 0; c < n; ++c) {
            hess[col * n + c] /= p;
            inv[col * n + c] /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = hess[r * n + col];
            if (f == 0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                hess[r * n + c] -= f * hess[col * n + c];
                inv[r * n + c] -= f * inv[col * n + c];
            }
        }
    }
    cov.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n * n; ++i) cov[i] = 2.0 * inv[i];
    return true;
}

struct HistSummary {
    double w = 0;              // bin width
    double background = 0;     // baseline estimate (counts per bin)
    double total_excess = 0;
    double mean = 0;           // excess-weighted moments
    double stddev = 0;
    double peak_center = 0;
    double peak_count = 0;
    double tail_tau = 0;       // from the log-slope after the peak
};

HistSummary summarize(const Histogram& h) {
    HistSummary s;
    s.w = static_cast<double>(h.bin_width());
    const std::size_t nb = h.size();
    const std::size_t edge = std::max<std::size_t>(1, nb / 10);
    std::vector<double> outer;
    for (std::size_t i = 0; i < edge; ++i) outer.push_back(static_cast<double>(h.count(i)));
    for (std::size_t i = nb - edge; i < nb; ++i)
        outer.push_back(static_cast<double>(h.count(i)));
    std::sort(outer.begin(), outer.end());
    s.background = outer[outer.size() / 2];

    std::size_t peak = 0;
    double m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < nb; ++i) {
        const double c = static_cast<double>(h.count(i));
        if (c > static_cast<double>(h.count(peak))) peak = i;
        const double ex = std::max(c - s.background, 0.0);
        s.total_excess += ex;
        m1 += ex * h.bin_center(i);
        m2 += ex * h.bin_center(i) * h.bin_center(i);
    }
    s.peak_center = h.bin_center(peak);
    s.peak_count = static_cast<double>(h.count(peak));
    if (s.total_excess > 0) {
        s.mean = m1 / s.total_excess;
        const double var = std::max(m2 / s.total_excess - s.mean * s.mean, 0.25 * s.w * s.w);
        s.stddev = std::sqrt(var);
    } else {
        s.mean = s.peak_center;
        s.stddev = s.w;
    }

    // tail log-slope for a decay-constant estimate
    const double thresh = std::max(3.0, 0.02 * std::max(s.peak_count - s.background, 1.0));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t npts = 0;
    for (std::size_t i = peak + 1; i < nb; ++i) {
        const double ex = static_cast<double>(h.count(i)) - s.background;
        if (ex < thresh) continue;
        const double x = h.bin_center(i), y = std::log(ex);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++npts;
    }
    if (npts >= 3) {
        const double denom = static_cast<double>(npts) * sxx - sx * sx;
        if (denom > 0) {
            const double slope = (static_cast<double>(npts) * sxy - sx * sy) / denom;
            if (slope < -1e-12) s.tail_tau = -1.0 / slope;
        }
    }
    if (s.tail_tau <= 0) s.tail_tau = std::max(s.stddev, s.w);
    return s;
}

void require_populated(const Histogram& h) {
    std::size_t populated = 0;
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h.count(i) > 0) ++populated;
    if (populated < 10)
        throw_validation("fit: need at least 10 populated histogram bins");
}

std::vector<DecadeResidual> per_decade_residuals(const Histogram& h,
                                                 const std::vector<double>& mu) {
    struct Acc {
        std::size_t n = 0;
        double sum = 0;
    };
    std::map<int, Acc> acc;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (mu[i] < 1.0) continue;
        const int dec = static_cast<int>(std::floor(std::log10(mu[i])));
        const double z = (static_cast<double>(h.count(i)) - mu[i]) / std::sqrt(mu[i]);
        acc[dec].n += 1;
        acc[dec].sum += z;
    }
    std::vector<DecadeResidual> out;
    for (const auto& [dec, a] : acc)
        out.push_back({dec, a.n, a.sum / static_cast<double>(a.n)});
    return out;
}

double decades_of_fit(const std::vector<double>& mu) {
    double mx = 0, mn = 1e300;
    for (double m : mu) {
        mx = std::max(mx, m);
        if (m >= 1.0) mn = std::min(mn, m);
    }
    if (mx < 1.0 || mn > mx) return 0.0;
    return std::log10(mx / mn);
}

OptResult run_multistart(const Model& model, const Histogram& h,
                         const std::vector<std::vector<double>>& starts, const Bounds& bounds) {
    OptResult best;
    bool have = false;
    std::string traces;
    for (const auto& th0 : starts) {
        OptResult r = bfgs_minimize(model, h, th0, bounds);
        if (!r.trace.empty()) traces += r.trace + "; ";
        if (r.converged && (!have || r.deviance < best.deviance)) {
            best = r;
            have = true;
        }
    }
    if (!have)
        throw_convergence("fit did not converge from any initialization: " + traces);
    return best;
}

}  // namespace

double emg_value(double t, double t0, double sigma, double tau, double amplitude,
                 double background) {
    if (!(sigma > 0)) throw_validation("emg_value: sigma must be > 0");
    if (!(tau > 0)) throw_validation("emg_value: tau must be > 0");
    return background + amplitude * emg_density(t, t0, sigma, tau).f;
}

IrfFit fit_irf(const Histogram& h) {
    require_populated(h);
    const HistSummary s = summarize(h);
    const Model model{ModelKind::gaussian, std::nullopt};

    const double b0 = std::max(s.background, 0.1);
    const double a0 = std::max(s.total_excess, 10.0);
    std::vector<std::vector<double>> starts = {
        {s.mean, std::log(s.stddev), std::log(a0), std::log(b0)},
        {s.peak_center, std::log(std::max(0.5 * s.stddev, 0.5 * s.w)), std::log(a0),
         std::log(b0)},
        {s.mean + s.w, std::log(1.5 * s.stddev), std::log(a0), std::log(b0)},
    };
    Bounds bounds;
    const double span = static_cast<double>(h.right_edge() - h.origin());
    bounds.lo = {static_cast<double>(h.origin()) - span, std::log(0.05 * s.w),
                 std::log(1e-6), std::log(1e-9)};
    bounds.hi = {static_cast<double>(h.right_edge()) + span, std::log(10.0 * span),
                 std::log(1e18), std::log(1e18)};

    OptResult r = run_multistart(model, h, starts, bounds);

    IrfFit fit;
    fit.t0_ps = r.th[0];
    fit.sigma_ps = std::exp(r.th[1]);
    fit.fwhm_ps = sigma_to_fwhm(fit.sigma_ps);
    fit.amplitude = std::exp(r.th[2]);
    fit.background = std::exp(r.th[3]);
    fit.deviance = r.deviance;
    fit.iterations = r.iterations;
    const double dof = std::max(1.0, static_cast<double>(h.size()) - 4.0);
    fit.goodness = r.deviance / dof;

    std::vector<double> cov_t;
    if (covariance_from_hessian(model, h, r.th, cov_t)) {
        // transform (t0, ln s, ln A, ln B) -> (t0, s, A, B)
        const double jac[4] = {1.0, fit.sigma_ps, fit.amplitude, fit.background};
        fit.covariance.assign(16, 0.0);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                fit.covariance[i * 4 + j] = jac[i] * cov_t[i * 4 + j] * jac[j];
        const double var_a = fit.covariance[2 * 4 + 2];
        if (var_a > 0 && fit.amplitude < 3.0 * std::sqrt(var_a)) fit.degenerate = true;
    } else {
        fit.degenerate = true;
    }

    ModelEval ev;
    model.eval(h, r.th, ev);
    fit.per_decade = per_decade_residuals(h, ev.mu);
    fit.decades_of_fit = decades_of_fit(ev.mu);
    return fit;
}

LifetimeFit fit_lifetime(const Histogram& h, std::optional<double> fix_sigma_ps) {
    require_populated(h);
    if (fix_sigma_ps && !(*fix_sigma_ps > 0))
        throw_validation("fit_lifetime: fixed sigma must be > 0");
    const HistSummary s = summarize(h);
    const Model model{ModelKind::emg, fix_sigma_ps};
    const bool fixed = fix_sigma_ps.has_value();

    const double b0 = std::max(s.background, 0.1);
    const double a0 = std::max(s.total_excess, 10.0);
    const double tau0 = s.tail_tau;
    const double sg0 =
        fixed ? *fix_sigma_ps
              : std::max(std::sqrt(std::max(s.stddev * s.stddev - tau0 * tau0, 0.0)),
                         0.25 * s.w);
    auto make_start = [&](double t0, double sg, double tau) {
        std::vector<double> th;
        th.push_back(t0);
        if (!fixed) th.push_back(std::log(sg));
        th.push_back(std::log(tau));
        th.push_back(std::log(a0));
        th.push_back(std::log(b0));
        return th;
    };
    std::vector<std::vector<double>> starts = {
        make_start(s.mean - tau0, sg0, tau0),                        // moment-based
        make_start(s.peak_center - sg0, sg0, 2.0 * tau0),            // tail-slope heavy
        make_start(s.peak_center, std::max(sg0, 0.5 * s.w), 0.5 * tau0),
    };

    Bounds bounds;
    const double span = static_cast<double>(h.right_edge() - h.origin());
    const double lt_lo = std::log(1e-3), lt_hi = std::log(1e12);
    bounds.lo.push_back(static_cast<double>(h.origin()) - span);
    bounds.hi.push_back(static_cast<double>(h.right_edge()) + span);
    if (!fixed) {
        bounds.lo.push_back(std::log(0.05 * s.w));
        bounds.hi.push_back(std::log(10.0 * span));
    }
    bounds.lo.push_back(lt_lo);
    bounds.hi.push_back(lt_hi);
    bounds.lo.push_back(std::log(1e-6));
    bounds.hi.push_back(std::log(1e18));
    bounds.lo.push_back(std::log(1e-9));
    bounds.hi.push_back(std::log(1e18));

    OptResult r = run_multistart(model, h, starts, bounds);

    const std::size_t i_tau = fixed ? 1 : 2;
    LifetimeFit fit;
    fit.t0_ps = r.th[0];
    fit.sigma_irf_ps = fixed ? *fix_sigma_ps : std::exp(r.th[1]);
    fit.sigma_fixed = fixed;
    fit.tau_ps = std::exp(r.th[i_tau]);
    fit.amplitude = std::exp(r.th[fixed ? 2 : 3]);
    fit.background = std::exp(r.th[fixed ? 3 : 4]);
    fit.deviance = r.deviance;
    fit.iterations = r.iterations;
    const double dof =
        std::max(1.0, static_cast<double>(h.size()) - static_cast<double>(model.n_free()));
    fit.goodness = r.deviance / dof;
    fit.tau_at_bound =
        r.th[i_tau] < lt_lo + 1e-6 || r.th[i_tau] > lt_hi - 1e-6;

    std::vector<double> cov_t;
    if (covariance_from_hessian(model, h, r.th, cov_t)) {
        const std::size_t np = model.n_free();
        std::vector<double> jac(np, 1.0);
        for (std::size_t j = 1; j < np; ++j) jac[j] = std::exp(r.th[j]);
        fit.covariance.assign(np * np, 0.0);
        for (std::size_t i = 0; i < np; ++i)
            for (std::size_t j = 0; j < np; ++j)
                fit.covariance[i * np + j] = jac[i] * cov_t[i * np + j] * jac[j];
        const double var_tau = fit.covariance[i_tau * np + i_tau];
        fit.tau_err_ps = var_tau > 0 ? std::sqrt(var_tau) : 0.0;
    }

    ModelEval ev;
    model.eval(h, r.th, ev);
    fit.per_decade = per_decade_residuals(h, ev.mu);
    fit.decades_of_fit = decades_of_fit(ev.mu);
    return fit;
}

double emg_deviance(const Histogram& h, const std::vector<double>& theta,
                    std::vector<double>* grad) {
    if (theta.size() != 5)
        throw_validation("emg_deviance: expected 5 transformed parameters");
    const Model model{ModelKind::emg, std::nullopt};
    ModelEval scratch;
    return deviance_and_grad(model, h, theta, grad, scratch);
}

double fwhm_of_histogram(const Histogram& h) {
    const std::size_t nb = h.size();
    if (nb < 3) throw_validation("fwhm_of_histogram: too few bins");

    const std::size_t edge = std::max<std::size_t>(1, nb / 10);
    std::vector<double> outer;
    for (std::size_t i = 0; i < edge; ++i) outer.push_back(static_cast<double>(h.count(i)));
    for (std::size_t i = nb - edge; i < nb; ++i)
        outer.push_back(static_cast<double>(h.count(i)));
    std::sort(outer.begin(), outer.end());
    const double baseline = outer[outer.size() / 2];

    std::size_t peak = 0;
    for (std::size_t i = 1; i < nb; ++i)
        if (h.count(i) > h.count(peak)) peak = i;
    const double peak_count = static_cast<double>(h.count(peak));
    if (peak_count - baseline < 20.0)
        throw_validation("fwhm_of_histogram: main peak below 20 counts over baseline");
    const double half = baseline + 0.5 * (peak_count - baseline);

    auto level = [&](std::size_t i) { return static_cast<double>(h.count(i)); };
    // left crossing
    double left = 0;
    bool found_left = false;
    for (std::size_t i = peak; i-- > 0;) {
        if (level(i) < half) {
            const double c0 = level(i), c1 = level(i + 1);
            const double frac = (half - c0) / (c1 - c0);
            left = h.bin_center(i) + frac * static_cast<double>(h.bin_width());
            found_left = true;
            break;
        }
    }
    double right = 0;
    bool found_right = false;
    for (std::size_t i = peak + 1; i < nb; ++i) {
        if (level(i) < half) {
            const double c0 = level(i - 1), c1 = level(i);
            const double frac = (c0 - half) / (c0 - c1);
            right = h.bin_center(i - 1) + frac * static_cast<double>(h.bin_width());
            found_right = true;
            break;
        }
    }
    if (!found_left || !found_right)
        throw_validation("fwhm_of_histogram: no half-maximum crossing found");
    const double fwhm = right - left;
    if (fwhm < static_cast<double>(h.bin_width()))
        throw_validation("fwhm_of_histogram: width not resolvable at this binning");
    return fwhm;
}

}  // namespace hbt
