#include "hbt/detect.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "hbt/errors.hpp"

namespace hbt {

namespace {

void validate_detector(const DetectorSpec& s) {
    if (s.efficiency < 0 || s.efficiency > 1)
        throw_validation("detector spec: efficiency outside [0,1]");
    if (s.dark_rate_hz < 0) throw_validation("detector spec: dark_rate must be >= 0");
    if (s.dead_time_ps < 0) throw_validation("detector spec: dead_time must be >= 0");
    if (s.jitter_fwhm_ps < 0) throw_validation("detector spec: jitter must be >= 0");
    if (s.kind == DetectorKind::gated_apd) {
        if (s.gate_period_ps < 0 || s.gate_width_ps < 0 || s.gate_width_ps > s.gate_period_ps)
            throw_validation("detector spec: need 0 <= gate_width <= gate_period");
        if (s.afterpulse_prob < 0 || s.afterpulse_prob > 1)
            throw_validation("detector spec: afterpulse_prob outside [0,1]");
        if (s.afterpulse_delay_tau_ps < 0)
            throw_validation("detector spec: afterpulse delay tau must be >= 0");
    }
}

bool in_gate(const DetectorSpec& s, TimePs t) {
    if (s.kind != DetectorKind::gated_apd || s.gate_period_ps <= 0) return true;
    TimePs phase = t % s.gate_period_ps;
    if (phase < 0) phase += s.gate_period_ps;
    return phase < s.gate_width_ps;
}

std::vector<TimePs> apply_dead_time(const std::vector<TimePs>& clicks, TimePs dead) {
    if (dead <= 0) return clicks;
    std::vector<TimePs> out;
    out.reserve(clicks.size());
    for (TimePs t : clicks) {
        if (out.empty() || t - out.back() >= dead) out.push_back(t);
    }
    return out;
}

}  // namespace

std::pair<EmissionRecord, EmissionRecord> beamsplit(const EmissionRecord& emissions,
                                                    const RngStream& seed) {
    RngStream rng = seed.derive("route");
    EmissionRecord a, b;
    a.duration = b.duration = emissions.duration;
    a.events.reserve(emissions.events.size() / 2 + 8);
    b.events.reserve(emissions.events.size() / 2 + 8);
    for (const Emission& e : emissions.events) {
        if (rng.bernoulli(0.5))
            a.events.push_back(e);
        else
            b.events.push_back(e);
    }
    return {std::move(a), std::move(b)};
}

TimestampStream detect(const EmissionRecord& arm, const DetectorSpec& spec, TimePs duration,
                       const RngStream& seed, std::uint32_t channel_id) {
    validate_detector(spec);
    if (duration < 0) throw_validation("detect: duration must be >= 0");
    if (!arm.events.empty() && arm.events.back().time > duration)
        throw_validation("detect: duration shorter than last emission (truncation must be explicit)");

    const double sigma =
        spec.jitter_fwhm_ps > 0 ? fwhm_to_sigma(static_cast<double>(spec.jitter_fwhm_ps)) : 0.0;

    // (1) efficiency thinning, (2) per-photon jitter.
    RngStream thin_rng = seed.derive("thin");
    RngStream jit_rng = seed.derive("jitter");
    std::vector<TimePs> clicks;
    clicks.reserve(static_cast<std::size_t>(
                       static_cast<double>(arm.events.size()) * spec.efficiency * 1.05) + 16);
    for (const Emission& e : arm.events) {
        if (spec.efficiency < 1.0 && !thin_rng.bernoulli(spec.efficiency)) continue;
        TimePs t = e.time;
        if (sigma > 0) t = checked_add(t, round_to_ps(jit_rng.gaussian(0.0, sigma)));
        if (t < 0 || t > duration) continue;
        clicks.push_back(t);
    }

    // (3) homogeneous dark-count Poisson process over [0, duration].
    if (spec.dark_rate_hz > 0 && duration > 0) {
        RngStream dark_rng = seed.derive("dark");
        const double mean_gap = 1e12 / spec.dark_rate_hz;
        double t = 0.0;
        for (;;) {
            t += dark_rng.exponential(mean_gap);
            TimePs tp = round_to_ps(t);
            if (tp > duration) break;
            clicks.push_back(tp);
        }
    }

    // (4) merge and sort.
    std::sort(clicks.begin(), clicks.end());

    // (5) non-paralyzable dead time.
    clicks = apply_dead_time(clicks, spec.dead_time_ps);

    // (6) gating and afterpulsing (gated-APD only).
    if (spec.kind == DetectorKind::gated_apd) {
        std::vector<TimePs> gated;
        gated.reserve(clicks.size());
        for (TimePs t : clicks)
            if (in_gate(spec, t)) gated.push_back(t);

        if (spec.afterpulse_prob > 0) {
            RngStream ap_rng = seed.derive("afterpulse");
            const double ap_tau = static_cast<double>(spec.afterpulse_delay_tau_ps);
            // Time-ordered cascade: every accepted click (afterpulses
            // included) may spawn one afterpulse; dead time re-applies.
            std::priority_queue<TimePs, std::vector<TimePs>, std::greater<TimePs>> pending(
                std::greater<TimePs>(), gated);
            std::vector<TimePs> accepted;
            accepted.reserve(gated.size() + gated.size() / 8);
            while (!pending.empty()) {
                TimePs t = pending.top();
                pending.pop();
                if (!accepted.empty() && spec.dead_time_ps > 0 &&
                    t - accepted.back() < spec.dead_time_ps)
                    continue;
                if (!in_gate(spec, t)) continue;
                accepted.push_back(t);
                if (ap_rng.bernoulli(spec.afterpulse_prob)) {
                    TimePs ap = checked_add(t, round_to_ps(ap_rng.exponential(ap_tau)));
                    if (ap <= duration) pending.push(ap);
                }
            }
            clicks = std::move(accepted);
        } else {
            clicks = std::move(gated);
        }
    }

    TimestampStream out;
    out.channel_id = channel_id;
    out.times = std::move(clicks);
    return out;
}

std::pair<TimestampStream, TimestampStream> inject_crosstalk(const TimestampStream& a,
                                                             const TimestampStream& b,
                                                             const CrosstalkSpec& spec,
                                                             const RngStream& seed) {
    if (spec.coupling < 0 || spec.coupling > 1)
        throw_validation("crosstalk spec: coupling outside [0,1]");
    TimestampStream oa = a, ob = b;
    if (spec.coupling == 0.0) return {std::move(oa), std::move(ob)};

    const double sigma = spec.induced_jitter_fwhm_ps > 0
                             ? fwhm_to_sigma(static_cast<double>(spec.induced_jitter_fwhm_ps))
                             : 0.0;
    auto induce = [&](const TimestampStream& src, TimestampStream& dst, const char* label) {
        RngStream rng = seed.derive(label);
        for (TimePs t : src.times) {
            if (!rng.bernoulli(spec.coupling)) continue;
            TimePs it = checked_add(t, spec.induced_delay_ps);
            if (sigma > 0) it = checked_add(it, round_to_ps(rng.gaussian(0.0, sigma)));
            dst.times.push_back(it);
        }
    };
    induce(a, ob, "a_to_b");
    induce(b, oa, "b_to_a");
    std::sort(oa.times.begin(), oa.times.end());
    std::sort(ob.times.begin(), ob.times.end());
    return {std::move(oa), std::move(ob)};
}

}  // namespace hbt
