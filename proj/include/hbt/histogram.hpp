#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hbt/errors.hpp"
#include "hbt/time.hpp"

namespace hbt {

// Uniform-bin counts over a delay axis. Bins are left-closed right-open:
// bin i covers [origin + i*w, origin + (i+1)*w). Out-of-range entries go
// to an explicit overflow tally, never silently dropped.
class Histogram {
public:
    Histogram(TimePs origin, TimePs bin_width, std::size_t n_bins)
        : origin_(origin), bin_width_(bin_width), counts_(n_bins, 0) {
        if (bin_width <= 0) throw_validation("Histogram: bin_width must be > 0");
        if (n_bins == 0) throw_validation("Histogram: need at least one bin");
    }

    TimePs origin() const { return origin_; }
    TimePs bin_width() const { return bin_width_; }
    std::size_t size() const { return counts_.size(); }
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    std::uint64_t count(std::size_t i) const { return counts_[i]; }
    std::uint64_t out_of_range() const { return out_of_range_; }

    TimePs bin_start(std::size_t i) const {
        return checked_add(origin_, checked_mul(bin_width_, static_cast<TimePs>(i)));
    }
    double bin_center(std::size_t i) const {
        return static_cast<double>(bin_start(i)) + 0.5 * static_cast<double>(bin_width_);
    }
    TimePs right_edge() const { return bin_start(counts_.size()); }

    // Floor-division bin lookup; nullopt for values outside [origin, right edge).
    std::optional<std::size_t> bin_index(TimePs t) const {
        TimePs d = checked_sub(t, origin_);
        if (d < 0) return std::nullopt;
        std::uint64_t i = static_cast<std::uint64_t>(d) / static_cast<std::uint64_t>(bin_width_);
        if (i >= counts_.size()) return std::nullopt;
        return static_cast<std::size_t>(i);
    }

    void add(TimePs t, std::uint64_t weight = 1) {
        if (auto i = bin_index(t)) {
            counts_[*i] += weight;
        } else {
            out_of_range_ += weight;
        }
    }

    void set_count(std::size_t i, std::uint64_t c) { counts_[i] = c; }

    std::uint64_t total() const {
        std::uint64_t s = 0;
        for (auto c : counts_) s += c;
        return s;
    }

    // Elementwise merge of a partial histogram with identical axes.
    void merge(const Histogram& other) {
        if (other.origin_ != origin_ || other.bin_width_ != bin_width_ ||
            other.counts_.size() != counts_.size())
            throw_validation("Histogram::merge: axis mismatch");
        for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
        out_of_range_ += other.out_of_range_;
    }

private:
    TimePs origin_;
    TimePs bin_width_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t out_of_range_ = 0;
};

}  // namespace hbt
