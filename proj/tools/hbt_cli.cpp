// Command-line front end. Everything goes through the C API so the CLI and
// any other binding see identical behavior.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hbt_capi.h"

namespace {

int fail(hbt_status s) {
    std::fprintf(stderr, "error: %s\n", hbt_last_error());
    return static_cast<int>(s);
}

// Config handle from the --config / --preset / --set options shared by the
// pipeline subcommands.
struct ConfigArgs {
    std::string config_path;
    std::string preset;
    std::vector<std::string> sets;

    void attach(CLI::App* cmd) {
        cmd->add_option("-c,--config", config_path, "key-value config file");
        cmd->add_option("--preset", preset, "named preset (fig2-qd, fig3-lifetime, fig4-laser)");
        cmd->add_option("--set", sets, "override one key, as key=value (repeatable)");
    }

    hbt_status build(hbt_config** out) const {
        hbt_status s;
        if (!config_path.empty())
            s = hbt_config_parse_file(config_path.c_str(), out);
        else if (!preset.empty())
            s = hbt_config_preset(preset.c_str(), out);
        else
            s = hbt_config_default(out);
        if (s != HBT_OK) return s;
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                hbt_config_free(*out);
                std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
                return HBT_ERR_CONFIG;
            }
            s = hbt_config_set(*out, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
            if (s != HBT_OK) {
                hbt_config_free(*out);
                return s;
            }
        }
        return HBT_OK;
    }
};

int emit(hbt_report* rep) {
    std::fputs(hbt_report_text(rep), stdout);
    hbt_report_free(rep);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hanbury Brown-Twiss bench simulator and analysis chain"};
    app.require_subcommand(1);

    ConfigArgs sim_cfg, corr_cfg, life_cfg, irf_cfg, xt_cfg;
    std::string corr_input, life_input, irf_input, xt_input;
    std::string sim_out, corr_out;
    bool life_hist = false, irf_hist = false;
    double fix_sigma = 0.0;
    std::string plot_input, plot_out, plot_title;
    bool plot_log = false;
    std::string repro_figure, repro_out = ".";
    std::uint64_t repro_seed = 1;

    auto* sim = app.add_subcommand("simulate", "simulate an acquisition, write timestamps");
    sim_cfg.attach(sim);
    sim->add_option("-o,--out", sim_out, "output path prefix");

    auto* corr = app.add_subcommand("correlate", "coincidence histogram and g2(0)");
    corr_cfg.attach(corr);
    corr->add_option("-i,--input", corr_input, "timestamp CSV (channel,time_ps)")->required();
    corr->add_option("-o,--out", corr_out, "output path prefix");

    auto* life = app.add_subcommand("lifetime", "decay-curve fit with IRF deconvolution");
    life_cfg.attach(life);
    life->add_option("-i,--input", life_input, "histogram or timestamp CSV")->required();
    life->add_flag("--histogram", life_hist, "input is a histogram CSV, not timestamps");
    life->add_option("--fix-sigma-ps", fix_sigma, "hold the IRF sigma fixed at this value");

    auto* irf = app.add_subcommand("irf", "instrument-response (Gaussian) fit");
    irf_cfg.attach(irf);
    irf->add_option("-i,--input", irf_input, "histogram or timestamp CSV")->required();
    irf->add_flag("--histogram", irf_hist, "input is a histogram CSV, not timestamps");

    auto* xt = app.add_subcommand("crosstalk", "inter-channel flatness test");
    xt_cfg.attach(xt);
    xt->add_option("-i,--input", xt_input, "timestamp CSV (channel,time_ps)")->required();

    auto* plot = app.add_subcommand("plot", "render a histogram CSV as SVG");
    plot->add_option("-i,--input", plot_input, "histogram CSV")->required();
    plot->add_option("-o,--out", plot_out, "SVG output path")->required();
    plot->add_option("--title", plot_title, "plot title");
    plot->add_flag("--log", plot_log, "log-scale count axis");

    auto* repro = app.add_subcommand("reproduce", "regenerate a canned figure end to end");
    repro->add_option("figure", repro_figure, "fig2, fig3 or fig4")
        ->required()
        ->check(CLI::IsMember({"fig2", "fig3", "fig4"}));
    repro->add_option("--seed", repro_seed, "simulation seed");
    repro->add_option("-o,--out", repro_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    hbt_config* cfg = nullptr;
    hbt_report* rep = nullptr;
    hbt_status s = HBT_OK;

    if (*sim) {
        if ((s = sim_cfg.build(&cfg)) != HBT_OK) return fail(s);
        s = hbt_simulate(cfg, sim_out.c_str(), &rep);
    } else if (*corr) {
        if ((s = corr_cfg.build(&cfg)) != HBT_OK) return fail(s);
        s = hbt_correlate(cfg, corr_input.c_str(), corr_out.c_str(), &rep);
    } else if (*life) {
        if ((s = life_cfg.build(&cfg)) != HBT_OK) return fail(s);
        s = hbt_lifetime(cfg, life_input.c_str(), life_hist ? 1 : 0, fix_sigma, &rep);
    } else if (*irf) {
        if ((s = irf_cfg.build(&cfg)) != HBT_OK) return fail(s);
        s = hbt_irf(cfg, irf_input.c_str(), irf_hist ? 1 : 0, &rep);
    } else if (*xt) {
        if ((s = xt_cfg.build(&cfg)) != HBT_OK) return fail(s);
        s = hbt_crosstalk(cfg, xt_input.c_str(), &rep);
    } else if (*plot) {
        s = hbt_plot(plot_input.c_str(), plot_out.c_str(),
                     plot_title.empty() ? nullptr : plot_title.c_str(), plot_log ? 1 : 0);
        if (s != HBT_OK) return fail(s);
        std::printf("wrote %s\n", plot_out.c_str());
        return 0;
    } else if (*repro) {
        s = hbt_reproduce(repro_figure.c_str(), repro_seed, repro_out.c_str(), &rep);
    }

    hbt_config_free(cfg);
    if (s != HBT_OK) return fail(s);
    return emit(rep);
}
