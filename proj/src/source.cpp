#include "hbt/source.hpp"

#include <algorithm>
#include <cmath>

#include "hbt/errors.hpp"

namespace hbt {

namespace {

// Pulses per RNG chunk. Chunk streams are derived from (seed, chunk index),
// so output does not depend on how generation is partitioned.
constexpr std::int64_t kChunkPulses = 1 << 16;

void sort_events(EmissionRecord& rec) {
    std::sort(rec.events.begin(), rec.events.end(),
              [](const Emission& x, const Emission& y) {
                  if (x.time != y.time) return x.time < y.time;
                  return x.pulse_index < y.pulse_index;
              });
}

void finish_record(EmissionRecord& rec, TimePs nominal_duration) {
    sort_events(rec);
    rec.duration = nominal_duration;
    if (!rec.events.empty() && rec.events.back().time >= rec.duration)
        rec.duration = checked_add(rec.events.back().time, 1);
}

void validate_qd(const QdPulsedSpec& s) {
    if (!(s.rep_rate_hz > 0)) throw_validation("qd spec: rep_rate must be > 0");
    if (s.p_emit < 0 || s.p_emit > 1) throw_validation("qd spec: p_emit outside [0,1]");
    if (s.p_two < 0 || s.p_two > 1) throw_validation("qd spec: p_two outside [0,1]");
    if (s.lifetime_tau_ps < 0) throw_validation("qd spec: lifetime must be >= 0");
    if (s.excitation_jitter_fwhm_ps < 0)
        throw_validation("qd spec: excitation jitter must be >= 0");
}

}  // namespace

TimePs rep_period_ps(double rep_rate_hz) {
    if (!(rep_rate_hz > 0)) throw_validation("rep_rate must be > 0");
    double p = 1e12 / rep_rate_hz;
    if (p < 1.0) throw_validation("rep rate above 1 THz not representable");
    return round_to_ps(p);
}

EmissionRecord generate_qd_pulsed(const QdPulsedSpec& spec, std::int64_t n_pulses,
                                  const RngStream& seed) {
    validate_qd(spec);
    if (n_pulses < 0) throw_validation("n_pulses must be >= 0");
    const TimePs period = rep_period_ps(spec.rep_rate_hz);
    const double sigma_exc =
        spec.excitation_jitter_fwhm_ps > 0
            ? fwhm_to_sigma(static_cast<double>(spec.excitation_jitter_fwhm_ps))
            : 0.0;
    const double tau = static_cast<double>(spec.lifetime_tau_ps);

    EmissionRecord rec;
    if (spec.p_emit > 0) {
        // With small p_emit the expected event count drives the reserve.
        double expect = static_cast<double>(n_pulses) * spec.p_emit * (1.0 + spec.p_two);
        if (expect < 1e9) rec.events.reserve(static_cast<std::size_t>(expect * 1.05) + 16);

        const bool skip = spec.p_emit < 0.1;
        for (std::int64_t chunk_start = 0; chunk_start < n_pulses; chunk_start += kChunkPulses) {
            const std::int64_t chunk_end = std::min(n_pulses, chunk_start + kChunkPulses);
            RngStream rng = seed.derive(static_cast<std::uint64_t>(chunk_start / kChunkPulses));
            std::int64_t k = chunk_start;
            while (k < chunk_end) {
                if (skip) {
                    std::uint64_t s = rng.geometric_skip(spec.p_emit);
                    if (s > static_cast<std::uint64_t>(chunk_end - k)) break;
                    k += static_cast<std::int64_t>(s);
                    if (k >= chunk_end) break;
                } else if (!rng.bernoulli(spec.p_emit)) {
                    ++k;
                    continue;
                }
                const TimePs base = checked_mul(period, k);
                const double exc = sigma_exc > 0 ? rng.gaussian(0.0, sigma_exc) : 0.0;
                const double d1 = exc + rng.exponential(tau);
                rec.events.push_back({checked_add(base, round_to_ps(d1)), k});
                if (spec.p_two > 0 && rng.bernoulli(spec.p_two)) {
                    const double d2 = exc + rng.exponential(tau);
                    rec.events.push_back({checked_add(base, round_to_ps(d2)), k});
                }
                ++k;
            }
        }
    }
    finish_record(rec, checked_mul(period, n_pulses));
    return rec;
}

EmissionRecord generate_laser_pulsed(const LaserPulsedSpec& spec, std::int64_t n_pulses,
                                     const RngStream& seed) {
    if (!(spec.rep_rate_hz > 0)) throw_validation("laser spec: rep_rate must be > 0");
    if (spec.mean_photon_number < 0)
        throw_validation("laser spec: mean_photon_number must be >= 0");
    if (spec.pulse_jitter_fwhm_ps < 0)
        throw_validation("laser spec: pulse jitter must be >= 0");
    if (n_pulses < 0) throw_validation("n_pulses must be >= 0");

    const TimePs period = rep_period_ps(spec.rep_rate_hz);
    const double mu = spec.mean_photon_number;
    const double sigma_pulse =
        spec.pulse_jitter_fwhm_ps > 0
            ? fwhm_to_sigma(static_cast<double>(spec.pulse_jitter_fwhm_ps))
            : 0.0;

    EmissionRecord rec;
    if (mu > 0) {
        rec.events.reserve(static_cast<std::size_t>(
                               std::min(1e9, static_cast<double>(n_pulses) * mu * 1.05)) + 16);
        for (std::int64_t chunk_start = 0; chunk_start < n_pulses; chunk_start += kChunkPulses) {
            const std::int64_t chunk_end = std::min(n_pulses, chunk_start + kChunkPulses);
            RngStream rng = seed.derive(static_cast<std::uint64_t>(chunk_start / kChunkPulses));
            for (std::int64_t k = chunk_start; k < chunk_end; ++k) {
                const std::uint64_t n = rng.poisson(mu);
                if (n == 0) continue;
                const TimePs base = checked_mul(period, k);
                // Gain-switch jitter displaces the whole pulse.
                const double off = sigma_pulse > 0 ? rng.gaussian(0.0, sigma_pulse) : 0.0;
                const TimePs t = checked_add(base, round_to_ps(off));
                for (std::uint64_t i = 0; i < n; ++i) rec.events.push_back({t, k});
            }
        }
    }
    finish_record(rec, checked_mul(period, n_pulses));
    return rec;
}

EmissionRecord generate_cw_emitter(const CwEmitterSpec& spec, TimePs duration,
                                   const RngStream& seed) {
    if (spec.reexcitation_rate_hz < 0)
        throw_validation("cw spec: reexcitation_rate must be >= 0");
    if (spec.lifetime_tau_ps < 0) throw_validation("cw spec: lifetime must be >= 0");
    if (duration < 0) throw_validation("duration must be >= 0");

    EmissionRecord rec;
    rec.duration = duration;
    if (spec.reexcitation_rate_hz <= 0) return rec;

    const double mean_wait = 1e12 / spec.reexcitation_rate_hz;
    const double tau = static_cast<double>(spec.lifetime_tau_ps);
    RngStream rng = seed.derive("cw");
    double t = 0.0;
    for (;;) {
        t += rng.exponential(mean_wait);
        t += rng.exponential(tau);
        TimePs tp = round_to_ps(t);
        if (tp > duration) break;
        rec.events.push_back({tp, -1});
    }
    return rec;
}

namespace {

// Fraction of an exponential-difference (Laplace) peak captured by a
// centered window of full width `window`. Valid when window >> jitter.
double window_capture(double tau, TimePs window_ps) {
    if (window_ps <= 0) throw_validation("expected_coincidence_rates: window must be > 0");
    if (tau <= 0.0) return 1.0;
    return 1.0 - std::exp(-0.5 * static_cast<double>(window_ps) / tau);
}

}  // namespace

CoincidenceExpectation expected_coincidence_rates(const QdPulsedSpec& spec, double eta_a,
                                                  double eta_b, TimePs window_ps) {
    validate_qd(spec);
    if (eta_a < 0 || eta_a > 1 || eta_b < 0 || eta_b > 1)
        throw_validation("expected_coincidence_rates: efficiency outside [0,1]");

    // Photon-count branches: 0, 1, 2 photons per pulse.
    const double p_photons[3] = {1.0 - spec.p_emit, spec.p_emit * (1.0 - spec.p_two),
                                 spec.p_emit * spec.p_two};
    const double eta[2] = {eta_a, eta_b};

    double p_a = 0.0, p_b = 0.0, p_ab = 0.0;
    for (int n = 0; n <= 2; ++n) {
        if (p_photons[n] <= 0.0) continue;
        // Enumerate per-photon (arm, detected) outcomes exhaustively.
        const int outcomes = 1 << (2 * n);
        for (int code = 0; code < outcomes; ++code) {
            double p = p_photons[n];
            bool click[2] = {false, false};
            for (int ph = 0; ph < n; ++ph) {
                const int arm = (code >> (2 * ph)) & 1;
                const bool det = ((code >> (2 * ph + 1)) & 1) != 0;
                p *= 0.5 * (det ? eta[arm] : 1.0 - eta[arm]);
                if (det) click[arm] = true;
            }
            if (click[0]) p_a += p;
            if (click[1]) p_b += p;
            if (click[0] && click[1]) p_ab += p;
        }
    }

    const double cap = window_capture(static_cast<double>(spec.lifetime_tau_ps), window_ps);
    CoincidenceExpectation e;
    e.click_a_per_pulse = p_a;
    e.click_b_per_pulse = p_b;
    e.center_per_pulse = p_ab * cap;
    e.side_per_pulse = p_a * p_b * cap;
    e.g2_zero = (p_a > 0 && p_b > 0) ? p_ab / (p_a * p_b) : 0.0;
    return e;
}

CoincidenceExpectation expected_coincidence_rates(const LaserPulsedSpec& spec, double eta_a,
                                                  double eta_b, TimePs window_ps) {
    if (spec.mean_photon_number < 0)
        throw_validation("laser spec: mean_photon_number must be >= 0");
    if (eta_a < 0 || eta_a > 1 || eta_b < 0 || eta_b > 1)
        throw_validation("expected_coincidence_rates: efficiency outside [0,1]");
    if (window_ps <= 0) throw_validation("expected_coincidence_rates: window must be > 0");

    // Independent Poisson thinnings per arm: <n_a n_b> = <n_a><n_b>.
    const double mu = spec.mean_photon_number;
    const double p_a = 1.0 - std::exp(-0.5 * mu * eta_a);
    const double p_b = 1.0 - std::exp(-0.5 * mu * eta_b);
    CoincidenceExpectation e;
    e.click_a_per_pulse = p_a;
    e.click_b_per_pulse = p_b;
    e.center_per_pulse = p_a * p_b;
    e.side_per_pulse = p_a * p_b;
    e.g2_zero = 1.0;
    return e;
}

}  // namespace hbt
