#pragma once

#include <string>

#include "hbt/config.hpp"
#include "hbt/correlate.hpp"
#include "hbt/lifetime.hpp"
#include "hbt/report.hpp"
#include "hbt/source.hpp"
#include "hbt/stream.hpp"

namespace hbt {

struct HbtRunResult {
    TimestampStream a;
    TimestampStream b;
    EmissionRecord truth;
    TimePs duration = 0;
};

// Full simulated HBT acquisition: generate -> beamsplit -> detect x2 ->
// inject_crosstalk. Every stage draws from a stream derived from
// (config.seed, stage label).
HbtRunResult run_hbt(const RunConfig& cfg);

// Start-stop (TAC) acquisition for lifetime/IRF work: starts are the pulse
// clock, stops are detector A clicks delayed by `stop_delay_ps` (the cable
// delay that keeps jittered stops after their start).
struct StartStopResult {
    TimestampStream start;
    TimestampStream stop;
    EmissionRecord truth;
    TimePs duration = 0;
};
StartStopResult run_start_stop(const RunConfig& cfg, TimePs stop_delay_ps,
                               const std::string& rng_label = "hbt-ss");

struct G2Analysis {
    Histogram histogram;
    PeakAreas peaks;
    G2Result g2;
    double t_acq_s = 0;
    double singles_a_hz = 0;
    double singles_b_hz = 0;
};

// Coincidence histogram, peak integration, g2(0) and (when dark rates are
// configured) the dark-count-corrected value.
G2Analysis analyze_g2(const RunConfig& cfg, const TimestampStream& a,
                      const TimestampStream& b, TimePs duration);

Report g2_report(const RunConfig& cfg, const G2Analysis& an);
Report lifetime_report(const LifetimeFit& fit);
Report irf_report(const IrfFit& fit);
Report crosstalk_report(const CrosstalkReport& rep);

// Bins of `h` whose centers lie in [lo, hi]; used to isolate one peak.
Histogram slice_histogram(const Histogram& h, TimePs lo, TimePs hi);

// End-to-end paper-figure reproduction. Writes timestamps, histogram CSV,
// report and SVG under out_dir (created if missing) and returns the report.
Report reproduce(const std::string& figure, std::uint64_t seed, const std::string& out_dir);

}  // namespace hbt
