#pragma once

#include <string>
#include <vector>

#include "hbt/histogram.hpp"
#include "hbt/stream.hpp"

namespace hbt {

// Timestamp interchange: CSV with header "channel,time_ps"; per-channel
// times non-decreasing. Streams are written one channel block after another,
// so write-then-read is the identity.
std::vector<TimestampStream> read_timestamps(const std::string& path);
void write_timestamps(const std::vector<TimestampStream>& streams, const std::string& path);

// Histogram CSV: header "bin_start_ps,count"; uniform bin width inferred on
// read (at least two rows required).
Histogram read_histogram(const std::string& path);
void write_histogram_csv(const Histogram& h, const std::string& path);

}  // namespace hbt
