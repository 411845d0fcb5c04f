#pragma once

#include <cstdint>
#include <string>

#include "hbt/correlate.hpp"
#include "hbt/detect.hpp"
#include "hbt/source.hpp"

namespace hbt {

enum class SourceKind { qd_pulsed, laser_pulsed, cw };

struct AnalysisParams {
    TimePs bin_width_ps = 550;     // coincidence histogram binning
    TimePs half_window_ps = 76200; // +-6 periods at 82 MHz, plus a peak window
    TimePs peak_window_ps = 3000;  // peak integration full width
    int n_side_peaks = 6;
    TimePs range_ps = 12000;       // start-stop histogram range
    TimePs ss_bin_width_ps = 4;    // start-stop histogram binning
};

struct Acquisition {
    std::int64_t n_pulses = 1000000;  // pulsed sources
    TimePs duration_ps = 0;           // CW source; 0 means unset
};

// Full run description. Exactly one source kind is active; the unused spec
// members keep their defaults.
struct RunConfig {
    int schema_version = 1;
    std::uint64_t seed = 1;
    SourceKind kind = SourceKind::qd_pulsed;
    QdPulsedSpec qd;
    LaserPulsedSpec laser;
    CwEmitterSpec cw;
    DetectorSpec det_a;
    DetectorSpec det_b;
    CrosstalkSpec crosstalk;
    Acquisition acq;
    AnalysisParams analysis;
    std::string output_prefix;
};

// Strict parsing: unknown keys are errors; quantity keys carry unit suffixes
// (_ps, _hz); missing suffixes are reported with the expected key name.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Set one key on an existing config, same strictness as the parser.
void config_set(RunConfig& cfg, const std::string& key, const std::string& value);

// Named paper-figure presets: "fig2-qd", "fig3-lifetime", "fig4-laser".
RunConfig config_preset(const std::string& name);

std::string config_to_text(const RunConfig& cfg);

const char* source_kind_name(SourceKind k);

}  // namespace hbt
