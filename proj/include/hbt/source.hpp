#pragma once

#include <cstdint>
#include <vector>

#include "hbt/rng.hpp"
#include "hbt/time.hpp"

namespace hbt {

// A ground-truth photon emission, pre-optics. pulse_index is -1 for CW
// emitters (no pulse structure).
struct Emission {
    TimePs time = 0;
    std::int64_t pulse_index = -1;
};

struct EmissionRecord {
    std::vector<Emission> events;  // sorted by time
    TimePs duration = 0;
};

// Pulsed quantum dot: per pulse, one photon with probability p_emit after an
// exponential decay delay; a second photon, sharing the excitation instant,
// with conditional probability p_two.
struct QdPulsedSpec {
    double rep_rate_hz = 82e6;
    TimePs lifetime_tau_ps = 400;
    double p_emit = 1.0;
    double p_two = 0.0;
    TimePs excitation_jitter_fwhm_ps = 0;
};

// Gain-switched pulsed laser: Poissonian photon number per pulse; the
// gain-switch timing jitter displaces all photons of a pulse together.
struct LaserPulsedSpec {
    double rep_rate_hz = 79e6;
    double mean_photon_number = 8.4e-4;
    TimePs pulse_jitter_fwhm_ps = 2300;
};

// CW-pumped emitter as a two-stage renewal process: exponential re-excitation
// wait followed by exponential decay. The underlying experiment names CW
// operation without a model; this is a documented extension.
struct CwEmitterSpec {
    double reexcitation_rate_hz = 0.0;
    TimePs lifetime_tau_ps = 0;
};

// Pulse period in integer picoseconds (82 MHz -> 12195 ps).
TimePs rep_period_ps(double rep_rate_hz);

EmissionRecord generate_qd_pulsed(const QdPulsedSpec& spec, std::int64_t n_pulses,
                                  const RngStream& seed);
EmissionRecord generate_laser_pulsed(const LaserPulsedSpec& spec, std::int64_t n_pulses,
                                     const RngStream& seed);
EmissionRecord generate_cw_emitter(const CwEmitterSpec& spec, TimePs duration,
                                   const RngStream& seed);

// Analytic expectation for coincidence peak areas, per pulse, obtained by
// exhaustive enumeration of routing/detection outcomes (QD, <= 2 photons per
// pulse) or Poisson moment identities (laser). Window truncation uses the
// Laplace tail of the exponential decay and assumes the window is wide
// compared to any Gaussian jitter. Pair counting assumes at most one click
// per arm per pulse, which holds whenever the detector dead time exceeds the
// decay span of a pulse.
struct CoincidenceExpectation {
    double click_a_per_pulse = 0;   // P(>=1 click on arm A from one pulse)
    double click_b_per_pulse = 0;
    double center_per_pulse = 0;    // expected tau=0 peak area per pulse
    double side_per_pulse = 0;      // expected area of any one side peak per pulse
    double g2_zero = 0;
};

CoincidenceExpectation expected_coincidence_rates(const QdPulsedSpec& spec, double eta_a,
                                                  double eta_b, TimePs window_ps);
CoincidenceExpectation expected_coincidence_rates(const LaserPulsedSpec& spec, double eta_a,
                                                  double eta_b, TimePs window_ps);

}  // namespace hbt
