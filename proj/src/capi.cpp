#include "hbt_capi.h"

#include <algorithm>
#include <exception>
#include <optional>
#include <string>
#include <utility>

#include "hbt/config.hpp"
#include "hbt/correlate.hpp"
#include "hbt/errors.hpp"
#include "hbt/io.hpp"
#include "hbt/lifetime.hpp"
#include "hbt/pipeline.hpp"
#include "hbt/report.hpp"
#include "hbt/svg.hpp"

struct hbt_config {
    hbt::RunConfig cfg;
};

struct hbt_report {
    hbt::Report rep;
    mutable std::string text_cache;
};

namespace {

thread_local std::string g_last_error;

hbt_status fail(hbt_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

template <typename Fn>
hbt_status guarded(Fn&& fn) {
    try {
        fn();
        return HBT_OK;
    } catch (const hbt::Error& e) {
        return fail(static_cast<hbt_status>(static_cast<int>(e.code())), e.what());
    } catch (const std::exception& e) {
        return fail(HBT_ERR_VALIDATION, e.what());
    } catch (...) {
        return fail(HBT_ERR_VALIDATION, "unknown error");
    }
}

hbt_status require(const void* p, const char* what) {
    if (p) return HBT_OK;
    return fail(HBT_ERR_VALIDATION, std::string("null ") + what);
}

hbt_report* wrap(hbt::Report&& r) { return new hbt_report{std::move(r), {}}; }

std::string prefix_or_empty(const char* p) { return p ? p : ""; }

// Shared input convention for the fitting entry points: a histogram CSV or
// a timestamp CSV whose first two channels act as start/stop.
hbt::Histogram load_decay_histogram(const hbt::RunConfig& cfg, const char* path,
                                    int is_histogram) {
    if (is_histogram) return hbt::read_histogram(path);
    auto streams = hbt::read_timestamps(path);
    if (streams.size() < 2)
        hbt::throw_validation(std::string(path) + ": need two channels (start, stop)");
    return hbt::start_stop_correlate(streams[0], streams[1], cfg.analysis.ss_bin_width_ps,
                                     cfg.analysis.range_ps);
}

}  // namespace

extern "C" {

const char* hbt_version(void) { return "1.0.0"; }

const char* hbt_last_error(void) { return g_last_error.c_str(); }

hbt_status hbt_config_default(hbt_config** out) {
    if (auto s = require(out, "output pointer")) return s;
    *out = new hbt_config{};
    return HBT_OK;
}

hbt_status hbt_config_preset(const char* name, hbt_config** out) {
    if (auto s = require(name, "preset name")) return s;
    if (auto s = require(out, "output pointer")) return s;
    return guarded([&] { *out = new hbt_config{hbt::config_preset(name)}; });
}

hbt_status hbt_config_parse_file(const char* path, hbt_config** out) {
    if (auto s = require(path, "path")) return s;
    if (auto s = require(out, "output pointer")) return s;
    return guarded([&] { *out = new hbt_config{hbt::parse_config_file(path)}; });
}

hbt_status hbt_config_set(hbt_config* cfg, const char* key, const char* value) {
    if (auto s = require(cfg, "config")) return s;
    if (auto s = require(key, "key")) return s;
    if (auto s = require(value, "value")) return s;
    return guarded([&] { hbt::config_set(cfg->cfg, key, value); });
}

void hbt_config_free(hbt_config* cfg) { delete cfg; }

hbt_status hbt_simulate(const hbt_config* cfg, const char* out_prefix, hbt_report** out) {
    if (auto s = require(cfg, "config")) return s;
    if (auto s = require(out, "output pointer")) return s;
    return guarded([&] {
        hbt::HbtRunResult run = hbt::run_hbt(cfg->cfg);
        const std::string prefix = prefix_or_empty(out_prefix);
        hbt::write_timestamps({run.a, run.b}, prefix + "timestamps.csv");
        hbt::Report rep;
        rep.set("source_kind", std::string(hbt::source_kind_name(cfg->cfg.kind)));
        rep.set("seed", cfg->cfg.seed);
        rep.set("duration_ps", run.duration);
        rep.set("emissions", static_cast<std::uint64_t>(run.truth.events.size()));
        rep.set("clicks_a", static_cast<std::uint64_t>(run.a.times.size()));
        rep.set("clicks_b", static_cast<std::uint64_t>(run.b.times.size()));
        rep.set("timestamps_path", prefix + "timestamps.csv");
        *out = wrap(std::move(rep));
    });
}

hbt_status hbt_correlate(const hbt_config* cfg, const char* timestamps_path,
                         const char* out_prefix, hbt_report** out) {
    if (auto s = require(cfg, "config")) return s;
    if (auto s = require(timestamps_path, "timestamps path")) return s;
    if (auto s = require(out, "output pointer")) return s;
    return guarded([&] {
        auto streams = hbt::read_timestamps(timestamps_path);
        if (streams.size() < 2)
            hbt::throw_validation(std::string(timestamps_path) +
                                  ": need two channels to correlate");
        hbt::TimePs duration = 0;
        for (const auto& s : streams)
            if (!s.times.empty()) duration = std::max(duration, s.times.back());
        hbt::G2Analysis an = hbt::analyze_g2(cfg->cfg, streams[0], streams[1], duration);
        const std::string prefix = prefix_or_empty(out_prefix);
        hbt::write_histogram_csv(an.histogram, prefix + "histogram.csv");
        hbt::Report rep = hbt::g2_report(cfg->cfg, an);
        rep.set("histogram_path", prefix + "histogram.csv");
        *out = wrap(std::move(rep));
    });
}

hbt_status hbt_lifetime(const hbt_config* cfg, const char* input_path, int is_histogram,
                        double fix_sigma_ps, hbt_report** out) {
    if (auto s = require(cfg, "config")) return s;
    if (auto s = require(input_path, "input path")) return s;
    if (auto s = require(out, "output pointer")) return s;
    return guarded([&] {
        hbt::Histogram h = load_decay_histogram(cfg->cfg, input_path, is_histogram);
        std::optional<double> fixed;
        if (fix_sigma_ps > 0) fixed = fix_sigma_ps;
        hbt::LifetimeFit fit = hbt::fit_lifetime(h, fixed);
        *out = wrap(hbt::lifetime_report(fit));
    });
}

hbt_status hbt_irf(const hbt_config* cfg, const char* input_path, int is_histogram,
                   hbt_report** out) {
    if (auto s = require(cfg, "config")) return s;
    if (auto s = require(input_path, "input path")) return s;
    if (auto s = require(out, "output pointer")) return s;
    return guarded([&] {
        hbt::Histogram h = load_decay_histogram(cfg->cfg, input_path, is_histogram);
        hbt::IrfFit fit = hbt::fit_irf(h);
        *out = wrap(hbt::irf_report(fit));
    });
}

hbt_status hbt_crosstalk(const hbt_config* cfg, const char* timestamps_path,
                         hbt_report** out) {
    if (auto s = require(cfg, "config")) return s;
    if (auto s = require(timestamps_path, "timestamps path")) return s;
    if (auto s = require(out, "output pointer")) return s;
    return guarded([&] {
        auto streams = hbt::read_timestamps(timestamps_path);
        if (streams.size() < 2)
            hbt::throw_validation(std::string(timestamps_path) +
                                  ": need two channels for the cross-talk test");
        hbt::CrosstalkReport rep =
            hbt::crosstalk_test(streams[0], streams[1], cfg->cfg.analysis.bin_width_ps,
                                cfg->cfg.analysis.half_window_ps);
        *out = wrap(hbt::crosstalk_report(rep));
    });
}

hbt_status hbt_plot(const char* histogram_path, const char* svg_path, const char* title,
                    int log_scale) {
    if (auto s = require(histogram_path, "histogram path")) return s;
    if (auto s = require(svg_path, "svg path")) return s;
    return guarded([&] {
        hbt::Histogram h = hbt::read_histogram(histogram_path);
        hbt::SvgOptions opt;
        if (title) opt.title = title;
        opt.log_scale = log_scale != 0;
        hbt::render_svg(h, svg_path, opt);
    });
}

hbt_status hbt_reproduce(const char* figure, uint64_t seed, const char* out_dir,
                         hbt_report** out) {
    if (auto s = require(figure, "figure name")) return s;
    if (auto s = require(out_dir, "output directory")) return s;
    if (auto s = require(out, "output pointer")) return s;
    return guarded([&] { *out = wrap(hbt::reproduce(figure, seed, out_dir)); });
}

size_t hbt_report_size(const hbt_report* rep) {
    return rep ? rep->rep.entries().size() : 0;
}

const char* hbt_report_key(const hbt_report* rep, size_t i) {
    if (!rep || i >= rep->rep.entries().size()) return nullptr;
    return rep->rep.entries()[i].first.c_str();
}

const char* hbt_report_value(const hbt_report* rep, size_t i) {
    if (!rep || i >= rep->rep.entries().size()) return nullptr;
    return rep->rep.entries()[i].second.c_str();
}

const char* hbt_report_get(const hbt_report* rep, const char* key) {
    if (!rep || !key) return nullptr;
    for (const auto& [k, v] : rep->rep.entries())
        if (k == key) return v.c_str();
    return nullptr;
}

hbt_status hbt_report_write(const hbt_report* rep, const char* path) {
    if (auto s = require(rep, "report")) return s;
    if (auto s = require(path, "path")) return s;
    return guarded([&] { rep->rep.write(path); });
}

const char* hbt_report_text(const hbt_report* rep) {
    if (!rep) return nullptr;
    rep->text_cache = rep->rep.to_text();
    return rep->text_cache.c_str();
}

void hbt_report_free(hbt_report* rep) { delete rep; }

}  // extern "C"
