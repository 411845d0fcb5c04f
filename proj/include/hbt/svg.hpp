#pragma once

#include <string>
#include <vector>

#include "hbt/histogram.hpp"

namespace hbt {

struct SvgOptions {
    std::string title;
    std::vector<std::string> annotations;  // rendered top-right
    bool log_scale = false;                // log10 count axis
    // Optional fitted-model overlay, one value per histogram bin.
    std::vector<double> overlay;
};

// Deterministic static plot: identical inputs produce byte-identical SVG.
void render_svg(const Histogram& h, const std::string& path, const SvgOptions& opt = {});

}  // namespace hbt
