#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>

#include "hbt_capi.h"

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/hbt_capi_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
    void fill(const std::string& text) {
        std::ofstream f(path);
        f << text;
    }
};

}  // namespace

TEST_CASE("version string is present") {
    const char* v = hbt_version();
    REQUIRE(v != nullptr);
    CHECK(std::strlen(v) > 0);
}

TEST_CASE("null arguments are rejected as validation errors") {
    CHECK(hbt_config_default(nullptr) == HBT_ERR_VALIDATION);
    CHECK(hbt_config_set(nullptr, "seed", "1") == HBT_ERR_VALIDATION);
    CHECK(hbt_simulate(nullptr, "/tmp/x", nullptr) == HBT_ERR_VALIDATION);
    CHECK(std::strlen(hbt_last_error()) > 0);
}

TEST_CASE("config lifecycle and error mapping") {
    hbt_config* cfg = nullptr;
    REQUIRE(hbt_config_default(&cfg) == HBT_OK);
    CHECK(hbt_config_set(cfg, "seed", "5") == HBT_OK);
    CHECK(hbt_config_set(cfg, "no.such.key", "1") == HBT_ERR_CONFIG);
    CHECK(std::string(hbt_last_error()).find("no.such.key") != std::string::npos);
    hbt_config_free(cfg);

    hbt_config* bad = nullptr;
    TempFile f("bad.conf");
    f.fill("schema_version = 1\nsource.wavelength_nm = 850\n");
    CHECK(hbt_config_parse_file(f.path.c_str(), &bad) == HBT_ERR_CONFIG);
    CHECK(bad == nullptr);
    CHECK(hbt_config_parse_file("/tmp/hbt_capi_missing.conf", &bad) == HBT_ERR_IO);

    hbt_config* preset = nullptr;
    CHECK(hbt_config_preset("fig9", &preset) == HBT_ERR_CONFIG);
    REQUIRE(hbt_config_preset("fig2-qd", &preset) == HBT_OK);
    hbt_config_free(preset);
}

TEST_CASE("unsorted timestamps surface as a validation status") {
    TempFile ts("unsorted.csv");
    ts.fill("channel,time_ps\n0,500\n0,100\n1,50\n");
    hbt_config* cfg = nullptr;
    REQUIRE(hbt_config_preset("fig2-qd", &cfg) == HBT_OK);
    hbt_report* rep = nullptr;
    CHECK(hbt_correlate(cfg, ts.path.c_str(), "/tmp/hbt_capi_corr_", &rep) ==
          HBT_ERR_VALIDATION);
    CHECK(rep == nullptr);
    CHECK(hbt_correlate(cfg, "/tmp/hbt_capi_missing.csv", "/tmp/hbt_capi_corr_", &rep) ==
          HBT_ERR_IO);
    hbt_config_free(cfg);
}

TEST_CASE("simulate then correlate round trip through the C API") {
    hbt_config* cfg = nullptr;
    REQUIRE(hbt_config_preset("fig2-qd", &cfg) == HBT_OK);
    REQUIRE(hbt_config_set(cfg, "acquisition.n_pulses", "200000") == HBT_OK);
    REQUIRE(hbt_config_set(cfg, "seed", "77") == HBT_OK);

    hbt_report* sim = nullptr;
    REQUIRE(hbt_simulate(cfg, "/tmp/hbt_capi_rt_", &sim) == HBT_OK);
    REQUIRE(sim != nullptr);
    const char* ts_path = hbt_report_get(sim, "timestamps_path");
    REQUIRE(ts_path != nullptr);
    CHECK(std::string(hbt_report_get(sim, "seed")) == "77");

    hbt_report* corr = nullptr;
    REQUIRE(hbt_correlate(cfg, ts_path, "/tmp/hbt_capi_rt_", &corr) == HBT_OK);
    REQUIRE(corr != nullptr);
    const char* g2 = hbt_report_get(corr, "g2_zero");
    REQUIRE(g2 != nullptr);
    const double v = std::atof(g2);
    CHECK(v > 0.0);
    CHECK(v < 0.3);

    // report accessors are mutually consistent
    const size_t n = hbt_report_size(corr);
    REQUIRE(n > 0);
    bool found = false;
    for (size_t i = 0; i < n; ++i) {
        REQUIRE(hbt_report_key(corr, i) != nullptr);
        REQUIRE(hbt_report_value(corr, i) != nullptr);
        if (std::string(hbt_report_key(corr, i)) == "g2_zero") {
            CHECK(std::string(hbt_report_value(corr, i)) == g2);
            found = true;
        }
    }
    CHECK(found);
    CHECK(hbt_report_key(corr, n) == nullptr);
    CHECK(hbt_report_get(corr, "no_such_key") == nullptr);

    const char* text = hbt_report_text(corr);
    REQUIRE(text != nullptr);
    CHECK(std::string(text).rfind("report_schema = 1\n", 0) == 0);

    TempFile out("rep.txt");
    CHECK(hbt_report_write(corr, out.path.c_str()) == HBT_OK);
    std::ifstream f(out.path);
    std::string first;
    std::getline(f, first);
    CHECK(first == "report_schema = 1");

    hbt_report_free(sim);
    hbt_report_free(corr);
    hbt_config_free(cfg);
    std::remove("/tmp/hbt_capi_rt_timestamps.csv");
    std::remove("/tmp/hbt_capi_rt_histogram.csv");
}

TEST_CASE("plot endpoint renders a histogram csv") {
    TempFile hist("plot.csv");
    hist.fill("bin_start_ps,count\n0,10\n550,200\n1100,30\n");
    TempFile svg("plot.svg");
    REQUIRE(hbt_plot(hist.path.c_str(), svg.path.c_str(), "capi plot", 0) == HBT_OK);
    std::ifstream f(svg.path);
    std::string body((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    CHECK(body.find("<svg") != std::string::npos);
    CHECK(hbt_plot("/tmp/hbt_capi_missing.csv", svg.path.c_str(), nullptr, 0) == HBT_ERR_IO);
}
