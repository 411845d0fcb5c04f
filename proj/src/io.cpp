#include "hbt/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>

#include "hbt/errors.hpp"

namespace hbt {

namespace {

[[noreturn]] void malformed(const std::string& path, std::size_t lineno, const char* what) {
    throw_io(path + ":" + std::to_string(lineno) + ": " + what);
}

bool parse_i64(const char* s, const char* end, std::int64_t& out) {
    if (s == end) return false;
    bool neg = false;
    if (*s == '-') {
        neg = true;
        ++s;
        if (s == end) return false;
    }
    std::int64_t v = 0;
    for (; s != end; ++s) {
        if (*s < '0' || *s > '9') return false;
        if (__builtin_mul_overflow(v, 10, &v)) return false;
        if (__builtin_add_overflow(v, *s - '0', &v)) return false;
    }
    out = neg ? -v : v;
    return true;
}

}  // namespace

std::vector<TimestampStream> read_timestamps(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw_io("cannot open timestamp file: " + path);

    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(f, line)) throw_io(path + ": empty file (expected header)");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "channel,time_ps")
        malformed(path, lineno, "bad header (expected 'channel,time_ps')");

    std::vector<TimestampStream> streams;
    std::map<std::uint32_t, std::size_t> index;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const char* s = line.c_str();
        const char* comma = std::strchr(s, ',');
        if (!comma) malformed(path, lineno, "missing comma");
        std::int64_t ch = 0, t = 0;
        if (!parse_i64(s, comma, ch) || ch < 0 || ch > 0xFFFFFFFFll)
            malformed(path, lineno, "bad channel field");
        if (!parse_i64(comma + 1, s + line.size(), t))
            malformed(path, lineno, "bad time_ps field");
        const auto chan = static_cast<std::uint32_t>(ch);
        auto it = index.find(chan);
        if (it == index.end()) {
            index.emplace(chan, streams.size());
            streams.push_back(TimestampStream{chan, {}});
            it = index.find(chan);
        }
        streams[it->second].times.push_back(t);
    }

    for (const auto& s : streams) {
        auto v = validate_stream(s);
        if (!v.ok)
            throw_validation(path + ": channel " + std::to_string(s.channel_id) +
                             " times not non-decreasing at event index " +
                             std::to_string(*v.first_violation));
    }
    return streams;
}

void write_timestamps(const std::vector<TimestampStream>& streams, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw_io("cannot open timestamp file for writing: " + path);
    f << "channel,time_ps\n";
    char buf[64];
    for (const auto& s : streams) {
        for (TimePs t : s.times) {
            std::snprintf(buf, sizeof(buf), "%u,%lld\n", s.channel_id,
                          static_cast<long long>(t));
            f << buf;
        }
    }
    if (!f) throw_io("failed writing timestamp file: " + path);
}

Histogram read_histogram(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw_io("cannot open histogram file: " + path);

    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(f, line)) throw_io(path + ": empty file (expected header)");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "bin_start_ps,count")
        malformed(path, lineno, "bad header (expected 'bin_start_ps,count')");

    std::vector<TimePs> starts;
    std::vector<std::uint64_t> counts;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const char* s = line.c_str();
        const char* comma = std::strchr(s, ',');
        if (!comma) malformed(path, lineno, "missing comma");
        std::int64_t start = 0, count = 0;
        if (!parse_i64(s, comma, start)) malformed(path, lineno, "bad bin_start_ps field");
        if (!parse_i64(comma + 1, s + line.size(), count) || count < 0)
            malformed(path, lineno, "bad count field");
        starts.push_back(start);
        counts.push_back(static_cast<std::uint64_t>(count));
    }
    if (starts.size() < 2)
        throw_validation(path + ": need at least two rows to infer the bin width");
    const TimePs width = checked_sub(starts[1], starts[0]);
    if (width <= 0) throw_validation(path + ": bin starts must be strictly increasing");
    for (std::size_t i = 1; i < starts.size(); ++i) {
        if (checked_sub(starts[i], starts[i - 1]) != width)
            throw_validation(path + ": non-uniform bin width at row " + std::to_string(i + 1));
    }

    Histogram h(starts[0], width, counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) h.set_count(i, counts[i]);
    return h;
}

void write_histogram_csv(const Histogram& h, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw_io("cannot open histogram file for writing: " + path);
    f << "bin_start_ps,count\n";
    char buf[64];
    for (std::size_t i = 0; i < h.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%lld,%llu\n", static_cast<long long>(h.bin_start(i)),
                      static_cast<unsigned long long>(h.count(i)));
        f << buf;
    }
    if (!f) throw_io("failed writing histogram file: " + path);
}

}  // namespace hbt
