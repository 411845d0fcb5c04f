#include "hbt/correlate.hpp"

#include <algorithm>
#include <cmath>

#include "hbt/errors.hpp"
#include "hbt/mathutil.hpp"

namespace hbt {

namespace {

void require_sorted(const TimestampStream& s, const char* name) {
    auto v = validate_stream(s);
    if (!v.ok)
        throw_validation(std::string("unsorted timestamp stream '") + name +
                         "' at index " + std::to_string(*v.first_violation));
}

std::size_t bins_for_span(TimePs span, TimePs bin_width) {
    return static_cast<std::size_t>((span + bin_width - 1) / bin_width);
}

}  // namespace

Histogram cross_correlate(const TimestampStream& a, const TimestampStream& b,
                          TimePs bin_width, TimePs half_window) {
    if (bin_width <= 0) throw_validation("cross_correlate: bin_width must be > 0");
    if (half_window < bin_width)
        throw_validation("cross_correlate: half_window must be >= bin_width");
    require_sorted(a, "a");
    require_sorted(b, "b");

    Histogram h(-half_window, bin_width, bins_for_span(2 * half_window, bin_width));
    const TimePs span_hi = h.right_edge();

    std::size_t lo = 0;
    for (TimePs ta : a.times) {
        const TimePs min_tb = checked_sub(ta, half_window);
        while (lo < b.times.size() && b.times[lo] < min_tb) ++lo;
        for (std::size_t j = lo; j < b.times.size(); ++j) {
            TimePs d = checked_sub(b.times[j], ta);
            if (d >= span_hi) break;
            h.add(d);
        }
    }
    return h;
}

Histogram start_stop_correlate(const TimestampStream& start, const TimestampStream& stop,
                               TimePs bin_width, TimePs range) {
    if (bin_width <= 0) throw_validation("start_stop_correlate: bin_width must be > 0");
    if (range < bin_width) throw_validation("start_stop_correlate: range must be >= bin_width");
    require_sorted(start, "start");
    require_sorted(stop, "stop");

    Histogram h(0, bin_width, bins_for_span(range, bin_width));
    std::size_t j = 0;
    for (std::size_t i = 0; i < start.times.size(); ++i) {
        const TimePs s = start.times[i];
        while (j < stop.times.size() && stop.times[j] < s) ++j;
        if (j == stop.times.size()) break;
        // first stop at/after this start, and before the next start
        if (i + 1 < start.times.size() && stop.times[j] >= start.times[i + 1]) continue;
        h.add(checked_sub(stop.times[j], s));
    }
    return h;
}

PeakAreas integrate_peaks(const Histogram& h, TimePs period, TimePs window, int n_side_peaks) {
    if (period <= 0) throw_validation("integrate_peaks: period must be > 0");
    if (window <= 0 || window > period)
        throw_validation("integrate_peaks: need 0 < window <= period (windows must not overlap)");
    if (n_side_peaks < 1) throw_validation("integrate_peaks: need at least one side peak");

    const double half = 0.5 * static_cast<double>(window);
    const double lo_needed = static_cast<double>(-n_side_peaks) * period - half;
    const double hi_needed = static_cast<double>(n_side_peaks) * period + half;
    if (static_cast<double>(h.origin()) > lo_needed ||
        static_cast<double>(h.right_edge()) < hi_needed)
        throw_validation("integrate_peaks: histogram span too small for requested side peaks");

    PeakAreas p;
    p.period = period;
    p.window = window;
    for (int m = -n_side_peaks; m <= n_side_peaks; ++m) {
        const double center = static_cast<double>(m) * static_cast<double>(period);
        double area = 0;
        // bins whose centers lie within [center - half, center + half]
        for (std::size_t i = 0; i < h.size(); ++i) {
            const double c = h.bin_center(i);
            if (c >= center - half && c <= center + half) area += static_cast<double>(h.count(i));
        }
        if (m == 0)
            p.center_area = area;
        else
            p.side_areas.emplace_back(m, area);
    }
    return p;
}

G2Result g2_zero(const PeakAreas& p) {
    if (p.side_areas.size() < 2) throw_validation("g2_zero: need at least 2 side peaks");
    const double side_sum = p.side_sum();
    const double side_mean = p.side_mean();
    if (!(side_mean > 0)) throw_validation("g2_zero: mean side-peak area is zero");

    G2Result r;
    r.center_area = p.center_area;
    r.side_mean = side_mean;
    r.side_sum = side_sum;
    r.n_side = p.side_areas.size();
    r.g2_zero = p.center_area / side_mean;
    const double c_eff = std::max(p.center_area, 1.0);  // small-count guard
    r.sigma = std::sqrt(c_eff / (side_mean * side_mean) +
                        r.g2_zero * r.g2_zero / side_sum);
    return r;
}

G2Result correct_darks(const G2Result& r, double dark_a_hz, double dark_b_hz,
                       double singles_a_hz, double singles_b_hz, double t_acq_s,
                       TimePs window_ps) {
    if (dark_a_hz < 0 || dark_b_hz < 0) throw_validation("correct_darks: dark rates must be >= 0");
    if (singles_a_hz < dark_a_hz || singles_b_hz < dark_b_hz)
        throw_validation("correct_darks: singles rates must be >= dark rates");
    if (t_acq_s <= 0) throw_validation("correct_darks: acquisition time must be > 0");
    if (window_ps <= 0) throw_validation("correct_darks: window must be > 0");

    const double w_s = static_cast<double>(window_ps) * 1e-12;
    // inclusion-exclusion: dark-dark pairs counted once
    const double n_acc = (dark_a_hz * singles_b_hz + singles_a_hz * dark_b_hz -
                          dark_a_hz * dark_b_hz) *
                         w_s * t_acq_s;

    G2Result out = r;
    out.accidental_area_per_window = n_acc;
    if (n_acc >= r.side_mean)
        throw_validation("correct_darks: accidental area exceeds side-peak mean; correction invalid");

    const double denom = r.side_mean - n_acc;
    const double g2c = std::max(0.0, r.center_area - n_acc) / denom;
    // Re-propagated uncertainty. N_acc is treated as a Poisson-distributed
    // subtraction (variance = N_acc), entering both numerator and denominator.
    const double n = static_cast<double>(r.n_side);
    const double var_num = std::max(r.center_area, 1.0) + n_acc;
    const double var_den = r.side_sum / (n * n) + n_acc;
    out.g2_zero_corrected = g2c;
    out.sigma_corrected = std::sqrt(var_num / (denom * denom) +
                                    g2c * g2c * var_den / (denom * denom));
    return out;
}

CrosstalkReport crosstalk_test(const TimestampStream& a, const TimestampStream& b,
                               TimePs bin_width, TimePs half_window) {
    Histogram h = cross_correlate(a, b, bin_width, half_window);
    CrosstalkReport rep{std::move(h)};
    if (a.times.empty() || b.times.empty()) {
        rep.underpowered = true;
        return rep;  // no verdict
    }

    const TimePs t_first = std::min(a.times.front(), b.times.front());
    const TimePs t_last = std::max(a.times.back(), b.times.back());
    const double span_ps = static_cast<double>(checked_sub(t_last, t_first));
    if (span_ps <= 0) {
        rep.underpowered = true;
        return rep;
    }
    rep.rate_a_hz = static_cast<double>(a.times.size()) / (span_ps * 1e-12);
    rep.rate_b_hz = static_cast<double>(b.times.size()) / (span_ps * 1e-12);
    // expected accidental pairs per delay bin: r_a * r_b * bin * T
    rep.expected_per_bin = static_cast<double>(a.times.size()) *
                           static_cast<double>(b.times.size()) *
                           static_cast<double>(bin_width) / span_ps;
    rep.underpowered = rep.expected_per_bin < 100.0;
    if (rep.expected_per_bin <= 0) return rep;

    double chi2 = 0;
    for (std::size_t i = 0; i < rep.histogram.size(); ++i) {
        const double n = static_cast<double>(rep.histogram.count(i));
        const double z = (n - rep.expected_per_bin) / std::sqrt(rep.expected_per_bin);
        chi2 += z * z;
        if (z > 5.0) rep.flagged_bins.push_back(i);
    }
    rep.chi2 = chi2;
    rep.dof = rep.histogram.size() > 1 ? rep.histogram.size() - 1 : 1;
    rep.p_value = chi2_sf(chi2, static_cast<double>(rep.dof));
    return rep;
}

}  // namespace hbt
