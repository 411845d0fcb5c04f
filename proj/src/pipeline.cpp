#include "hbt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "hbt/detect.hpp"
#include "hbt/errors.hpp"
#include "hbt/io.hpp"
#include "hbt/svg.hpp"

namespace hbt {

namespace {

EmissionRecord generate_source(const RunConfig& cfg, const RngStream& root) {
    const RngStream src = root.derive("source");
    switch (cfg.kind) {
        case SourceKind::qd_pulsed:
            return generate_qd_pulsed(cfg.qd, cfg.acq.n_pulses, src);
        case SourceKind::laser_pulsed:
            return generate_laser_pulsed(cfg.laser, cfg.acq.n_pulses, src);
        case SourceKind::cw:
            if (cfg.acq.duration_ps <= 0)
                throw_config("cw source requires acquisition.duration_ps > 0");
            return generate_cw_emitter(cfg.cw, cfg.acq.duration_ps, src);
    }
    throw_config("unreachable source kind");
}

TimePs source_period(const RunConfig& cfg) {
    switch (cfg.kind) {
        case SourceKind::qd_pulsed: return rep_period_ps(cfg.qd.rep_rate_hz);
        case SourceKind::laser_pulsed: return rep_period_ps(cfg.laser.rep_rate_hz);
        case SourceKind::cw:
            throw_validation("peak analysis requires a pulsed source (cw has no rep period)");
    }
    throw_validation("unreachable source kind");
}

}  // namespace

HbtRunResult run_hbt(const RunConfig& cfg) {
    const RngStream root(cfg.seed, "hbt");
    HbtRunResult r;
    r.truth = generate_source(cfg, root);
    r.duration = r.truth.duration;
    auto [arm_a, arm_b] = beamsplit(r.truth, root.derive("splitter"));
    r.a = detect(arm_a, cfg.det_a, r.duration, root.derive("det0"), 0);
    r.b = detect(arm_b, cfg.det_b, r.duration, root.derive("det1"), 1);
    auto [xa, xb] = inject_crosstalk(r.a, r.b, cfg.crosstalk, root.derive("xtalk"));
    r.a = std::move(xa);
    r.b = std::move(xb);
    return r;
}

StartStopResult run_start_stop(const RunConfig& cfg, TimePs stop_delay_ps,
                               const std::string& rng_label) {
    if (cfg.kind != SourceKind::qd_pulsed)
        throw_validation("start-stop acquisition is defined for the pulsed qd source");
    const RngStream root(cfg.seed, rng_label);
    StartStopResult r;
    r.truth = generate_qd_pulsed(cfg.qd, cfg.acq.n_pulses, root.derive("source"));
    r.duration = checked_add(r.truth.duration, stop_delay_ps);

    const TimePs period = rep_period_ps(cfg.qd.rep_rate_hz);
    r.start.channel_id = 0;
    r.start.times.reserve(static_cast<std::size_t>(cfg.acq.n_pulses));
    for (std::int64_t k = 0; k < cfg.acq.n_pulses; ++k)
        r.start.times.push_back(checked_mul(period, k));

    TimestampStream clicks = detect(r.truth, cfg.det_a, r.truth.duration,
                                    root.derive("det0"), 1);
    r.stop.channel_id = 1;
    r.stop.times.reserve(clicks.times.size());
    for (TimePs t : clicks.times) r.stop.times.push_back(checked_add(t, stop_delay_ps));
    return r;
}

G2Analysis analyze_g2(const RunConfig& cfg, const TimestampStream& a,
                      const TimestampStream& b, TimePs duration) {
    Histogram h = cross_correlate(a, b, cfg.analysis.bin_width_ps, cfg.analysis.half_window_ps);
    PeakAreas p = integrate_peaks(h, source_period(cfg), cfg.analysis.peak_window_ps,
                                  cfg.analysis.n_side_peaks);
    G2Result g2 = g2_zero(p);
    G2Analysis an{std::move(h), std::move(p), std::move(g2)};
    an.t_acq_s = static_cast<double>(duration) * 1e-12;
    if (an.t_acq_s > 0) {
        an.singles_a_hz = static_cast<double>(a.times.size()) / an.t_acq_s;
        an.singles_b_hz = static_cast<double>(b.times.size()) / an.t_acq_s;
    }
    if (cfg.det_a.dark_rate_hz > 0 || cfg.det_b.dark_rate_hz > 0) {
        an.g2 = correct_darks(an.g2, cfg.det_a.dark_rate_hz, cfg.det_b.dark_rate_hz,
                              std::max(an.singles_a_hz, cfg.det_a.dark_rate_hz),
                              std::max(an.singles_b_hz, cfg.det_b.dark_rate_hz), an.t_acq_s,
                              cfg.analysis.peak_window_ps);
    }
    return an;
}

Report g2_report(const RunConfig& cfg, const G2Analysis& an) {
    Report r;
    r.set("source_kind", std::string(source_kind_name(cfg.kind)));
    r.set("seed", cfg.seed);
    r.set("t_acq_s", an.t_acq_s);
    r.set("singles_a_hz", an.singles_a_hz);
    r.set("singles_b_hz", an.singles_b_hz);
    r.set("center_area", an.g2.center_area);
    r.set("side_area_mean", an.g2.side_mean);
    r.set("n_side_peaks", static_cast<std::uint64_t>(an.g2.n_side));
    r.set("g2_zero", an.g2.g2_zero);
    r.set("g2_sigma", an.g2.sigma);
    if (an.g2.g2_zero_corrected) {
        r.set("g2_zero_corrected", *an.g2.g2_zero_corrected);
        r.set("g2_sigma_corrected", *an.g2.sigma_corrected);
        r.set("accidental_area_per_window", an.g2.accidental_area_per_window);
    }
    r.set("histogram_pairs", an.histogram.total());
    r.set("histogram_out_of_range", an.histogram.out_of_range());
    return r;
}

Report irf_report(const IrfFit& fit) {
    Report r;
    r.set("irf_t0_ps", fit.t0_ps);
    r.set("irf_sigma_ps", fit.sigma_ps);
    r.set("irf_fwhm_ps", fit.fwhm_ps);
    r.set("irf_amplitude", fit.amplitude);
    r.set("irf_background", fit.background);
    r.set("irf_goodness", fit.goodness);
    r.set("irf_decades_of_fit", fit.decades_of_fit);
    r.set("irf_degenerate", static_cast<std::int64_t>(fit.degenerate ? 1 : 0));
    for (const auto& d : fit.per_decade) {
        r.set("irf_residual_decade_" + std::to_string(d.decade),
              d.mean_pearson);
    }
    return r;
}

Report lifetime_report(const LifetimeFit& fit) {
    Report r;
    r.set("tau_ps", fit.tau_ps);
    r.set("tau_err_ps", fit.tau_err_ps);
    r.set("t0_ps", fit.t0_ps);
    r.set("sigma_irf_ps", fit.sigma_irf_ps);
    r.set("sigma_fixed", static_cast<std::int64_t>(fit.sigma_fixed ? 1 : 0));
    r.set("amplitude", fit.amplitude);
    r.set("background", fit.background);
    r.set("goodness", fit.goodness);
    r.set("decades_of_fit", fit.decades_of_fit);
    r.set("tau_at_bound", static_cast<std::int64_t>(fit.tau_at_bound ? 1 : 0));
    return r;
}

Report crosstalk_report(const CrosstalkReport& rep) {
    Report r;
    r.set("rate_a_hz", rep.rate_a_hz);
    r.set("rate_b_hz", rep.rate_b_hz);
    r.set("expected_per_bin", rep.expected_per_bin);
    r.set("chi2", rep.chi2);
    r.set("dof", static_cast<std::uint64_t>(rep.dof));
    if (rep.p_value)
        r.set("p_value", *rep.p_value);
    else
        r.set("p_value", std::string("none"));
    r.set("underpowered", static_cast<std::int64_t>(rep.underpowered ? 1 : 0));
    r.set("n_flagged_bins", static_cast<std::uint64_t>(rep.flagged_bins.size()));
    for (std::size_t i = 0; i < rep.flagged_bins.size() && i < 16; ++i) {
        r.set("flagged_bin_start_ps_" + std::to_string(i),
              rep.histogram.bin_start(rep.flagged_bins[i]));
    }
    return r;
}

Histogram slice_histogram(const Histogram& h, TimePs lo, TimePs hi) {
    std::vector<std::pair<TimePs, std::uint64_t>> kept;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double c = h.bin_center(i);
        if (c >= static_cast<double>(lo) && c <= static_cast<double>(hi))
            kept.emplace_back(h.bin_start(i), h.count(i));
    }
    if (kept.size() < 3) throw_validation("slice_histogram: fewer than 3 bins in range");
    Histogram out(kept.front().first, h.bin_width(), kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) out.set_count(i, kept[i].second);
    return out;
}

namespace {

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

Report reproduce_g2_figure(const std::string& tag, const RunConfig& cfg,
                           const std::string& out_dir) {
    HbtRunResult run = run_hbt(cfg);
    G2Analysis an = analyze_g2(cfg, run.a, run.b, run.duration);
    Report rep = g2_report(cfg, an);

    // model-free width of the +1 side peak (the center peak of an
    // antibunched source has too few counts for a width)
    const TimePs period = source_period(cfg);
    try {
        Histogram side = slice_histogram(an.histogram, period / 2, period + period / 2);
        rep.set("side_peak_fwhm_ps", fwhm_of_histogram(side));
    } catch (const Error&) {
        // width not resolvable at this binning; omit the key
    }
    if (cfg.kind == SourceKind::qd_pulsed) {
        const auto exp = expected_coincidence_rates(cfg.qd, cfg.det_a.efficiency,
                                                    cfg.det_b.efficiency,
                                                    cfg.analysis.peak_window_ps);
        rep.set("g2_expected", exp.g2_zero);
    } else if (cfg.kind == SourceKind::laser_pulsed) {
        rep.set("g2_expected", 1.0);
    }

    write_timestamps({run.a, run.b}, join(out_dir, tag + "_timestamps.csv"));
    write_histogram_csv(an.histogram, join(out_dir, tag + "_histogram.csv"));
    rep.write(join(out_dir, tag + "_report.txt"));

    SvgOptions opt;
    opt.title = tag + " coincidence histogram";
    opt.annotations = {"g2(0) = " + Report::format_double(an.g2.g2_zero) + " +- " +
                       Report::format_double(an.g2.sigma)};
    if (an.g2.g2_zero_corrected)
        opt.annotations.push_back("corrected = " +
                                  Report::format_double(*an.g2.g2_zero_corrected));
    render_svg(an.histogram, join(out_dir, tag + "_histogram.svg"), opt);
    return rep;
}

Report reproduce_fig3(std::uint64_t seed, const std::string& out_dir) {
    constexpr TimePs kStopDelay = 1000;

    RunConfig cfg = config_preset("fig3-lifetime");
    cfg.seed = seed;

    // IRF pass: the attenuated laser drives the detector directly, so the
    // source decay is turned off and only detector jitter remains.
    RunConfig irf_cfg = cfg;
    irf_cfg.qd.lifetime_tau_ps = 0;
    StartStopResult irf_run = run_start_stop(irf_cfg, kStopDelay, "hbt-ss-irf");
    Histogram irf_hist = start_stop_correlate(irf_run.start, irf_run.stop,
                                              cfg.analysis.ss_bin_width_ps, 4000);
    IrfFit irf = fit_irf(irf_hist);

    // Decay pass, deconvolved with the fitted IRF width.
    StartStopResult decay_run = run_start_stop(cfg, kStopDelay, "hbt-ss-decay");
    Histogram decay_hist = start_stop_correlate(decay_run.start, decay_run.stop,
                                                cfg.analysis.ss_bin_width_ps,
                                                cfg.analysis.range_ps);
    LifetimeFit fit = fit_lifetime(decay_hist, irf.sigma_ps);

    Report rep = irf_report(irf);
    const Report life = lifetime_report(fit);
    for (const auto& [k, v] : life.entries()) rep.set(k, v);
    rep.set("seed", seed);

    write_timestamps({decay_run.start, decay_run.stop},
                     join(out_dir, "fig3_timestamps.csv"));
    write_histogram_csv(irf_hist, join(out_dir, "fig3_irf_histogram.csv"));
    write_histogram_csv(decay_hist, join(out_dir, "fig3_decay_histogram.csv"));
    rep.write(join(out_dir, "fig3_report.txt"));

    // log-scale plot with the fitted model overlay
    SvgOptions opt;
    opt.title = "fig3 lifetime fit";
    opt.log_scale = true;
    opt.annotations = {"tau = " + Report::format_double(fit.tau_ps) + " ps",
                       "IRF FWHM = " + Report::format_double(irf.fwhm_ps) + " ps"};
    opt.overlay.resize(decay_hist.size());
    const double w = static_cast<double>(decay_hist.bin_width());
    for (std::size_t i = 0; i < decay_hist.size(); ++i) {
        opt.overlay[i] = fit.background +
                         fit.amplitude * w *
                             (emg_value(decay_hist.bin_center(i), fit.t0_ps, fit.sigma_irf_ps,
                                        fit.tau_ps, 1.0, 0.0));
    }
    render_svg(decay_hist, join(out_dir, "fig3_decay_histogram.svg"), opt);
    return rep;
}

}  // namespace

Report reproduce(const std::string& figure, std::uint64_t seed, const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw_io("cannot create output directory: " + out_dir);

    if (figure == "fig2") {
        RunConfig cfg = config_preset("fig2-qd");
        cfg.seed = seed;
        return reproduce_g2_figure("fig2", cfg, out_dir);
    }
    if (figure == "fig3") return reproduce_fig3(seed, out_dir);
    if (figure == "fig4") {
        RunConfig cfg = config_preset("fig4-laser");
        cfg.seed = seed;
        return reproduce_g2_figure("fig4", cfg, out_dir);
    }
    throw_config("unknown figure '" + figure + "' (expected fig2, fig3 or fig4)");
}

}  // namespace hbt
