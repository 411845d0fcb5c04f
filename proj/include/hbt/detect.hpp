#pragma once

#include <cstdint>
#include <utility>

#include "hbt/rng.hpp"
#include "hbt/source.hpp"
#include "hbt/stream.hpp"
#include "hbt/time.hpp"

namespace hbt {

enum class DetectorKind { sspd, gated_apd };

// Parametric detector model: efficiency is the lumped per-channel value
// including coupling losses; the 50% beamsplitter factor is applied by
// beamsplit(), never folded in here.
struct DetectorSpec {
    double efficiency = 0.02;
    double dark_rate_hz = 10.0;
    TimePs jitter_fwhm_ps = 68;
    TimePs dead_time_ps = 10000;  // non-paralyzable
    DetectorKind kind = DetectorKind::sspd;
    // gated-APD only:
    TimePs gate_period_ps = 0;
    TimePs gate_width_ps = 0;
    double afterpulse_prob = 0.0;
    TimePs afterpulse_delay_tau_ps = 0;
};

struct CrosstalkSpec {
    double coupling = 0.0;
    TimePs induced_delay_ps = 0;
    TimePs induced_jitter_fwhm_ps = 0;
};

// 50/50 routing of each photon to arm A or B.
std::pair<EmissionRecord, EmissionRecord> beamsplit(const EmissionRecord& emissions,
                                                    const RngStream& seed);

// Emissions -> click stream. Fixed order of operations: efficiency thinning,
// Gaussian jitter, dark-count Poisson process over [0, duration], merge,
// non-paralyzable dead time, then (gated-APD only) gating and afterpulsing.
// Clicks jittered outside [0, duration] are dropped.
TimestampStream detect(const EmissionRecord& arm, const DetectorSpec& spec, TimePs duration,
                       const RngStream& seed, std::uint32_t channel_id = 0);

// Each click on one channel induces, with probability `coupling`, a click on
// the other channel at +induced_delay (plus Gaussian jitter). coupling = 0 is
// the identity.
std::pair<TimestampStream, TimestampStream> inject_crosstalk(const TimestampStream& a,
                                                             const TimestampStream& b,
                                                             const CrosstalkSpec& spec,
                                                             const RngStream& seed);

}  // namespace hbt
