#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hbt/time.hpp"

namespace hbt {

// One channel's detection record: event times in non-decreasing order.
struct TimestampStream {
    std::uint32_t channel_id = 0;
    std::vector<TimePs> times;
};

struct StreamValidation {
    bool ok = true;
    std::optional<std::size_t> first_violation;  // index of the first out-of-order time
    bool has_duplicates = false;
};

inline StreamValidation validate_stream(const TimestampStream& s) {
    StreamValidation v;
    for (std::size_t i = 1; i < s.times.size(); ++i) {
        if (s.times[i] < s.times[i - 1]) {
            v.ok = false;
            v.first_violation = i;
            return v;
        }
        if (s.times[i] == s.times[i - 1]) v.has_duplicates = true;
    }
    return v;
}

}  // namespace hbt
