#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hbt/histogram.hpp"
#include "hbt/stream.hpp"
#include "hbt/time.hpp"

namespace hbt {

// All-pairs cross-correlation: for every pair (ta, tb) with tb - ta in
// [-half_window, +half_window), increment the bin of (tb - ta). Two-pointer
// sweep, O(n + m + pairs).
Histogram cross_correlate(const TimestampStream& a, const TimestampStream& b,
                          TimePs bin_width, TimePs half_window);

// Classic TAC emulation: for each start, the delay to the first stop at or
// after it and before the next start. Delays beyond `range` land in the
// histogram's out-of-range tally.
Histogram start_stop_correlate(const TimestampStream& start, const TimestampStream& stop,
                               TimePs bin_width, TimePs range);

struct PeakAreas {
    TimePs period = 0;
    TimePs window = 0;
    double center_area = 0;
    std::vector<std::pair<int, double>> side_areas;  // (peak index m, area), m != 0

    double side_sum() const {
        double s = 0;
        for (const auto& [m, a] : side_areas) s += a;
        return s;
    }
    double side_mean() const {
        return side_areas.empty() ? 0.0 : side_sum() / static_cast<double>(side_areas.size());
    }
};

// Sum counts of bins whose centers lie within [m*period - window/2,
// m*period + window/2] for each peak m in [-n_side_peaks, n_side_peaks].
PeakAreas integrate_peaks(const Histogram& h, TimePs period, TimePs window, int n_side_peaks);

struct G2Result {
    double g2_zero = 0;
    double sigma = 0;
    std::optional<double> g2_zero_corrected;
    std::optional<double> sigma_corrected;
    // inputs carried along for the correction and reporting
    double center_area = 0;
    double side_mean = 0;
    double side_sum = 0;
    std::size_t n_side = 0;
    double accidental_area_per_window = 0;
};

// g2 = center / mean(side); Poisson error propagation with a small-count
// guard: the center variance term uses max(center, 1) so that near-zero
// center areas still report a finite uncertainty.
G2Result g2_zero(const PeakAreas& p);

// Subtract the expected accidental-coincidence area per peak window,
// N_acc = (dark_a*singles_b + singles_a*dark_b - dark_a*dark_b) * window * t_acq,
// from both center and side areas.
G2Result correct_darks(const G2Result& r, double dark_a_hz, double dark_b_hz,
                       double singles_a_hz, double singles_b_hz, double t_acq_s,
                       TimePs window_ps);

struct CrosstalkReport {
    Histogram histogram;
    double rate_a_hz = 0;
    double rate_b_hz = 0;
    double expected_per_bin = 0;
    double chi2 = 0;
    std::size_t dof = 0;
    std::optional<double> p_value;  // absent when no verdict is possible
    bool underpowered = false;      // expected counts per bin below 100
    std::vector<std::size_t> flagged_bins;  // bins exceeding +5 sigma
};

// Compares the cross-correlation histogram of two streams against the flat
// accidental expectation r_a * r_b * bin * T, rates estimated from the
// streams themselves.
CrosstalkReport crosstalk_test(const TimestampStream& a, const TimestampStream& b,
                               TimePs bin_width, TimePs half_window);

}  // namespace hbt
