#include "hbt/report.hpp"

#include <cstdio>
#include <fstream>

#include "hbt/errors.hpp"

namespace hbt {

void Report::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : kv_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    kv_.emplace_back(key, value);
}

void Report::set(const std::string& key, double value) { set(key, format_double(value)); }

void Report::set(const std::string& key, std::int64_t value) {
    set(key, std::to_string(value));
}

void Report::set(const std::string& key, std::uint64_t value) {
    set(key, std::to_string(value));
}

std::optional<std::string> Report::get(const std::string& key) const {
    for (const auto& [k, v] : kv_)
        if (k == key) return v;
    return std::nullopt;
}

std::string Report::to_text() const {
    std::string out = "report_schema = 1\n";
    for (const auto& [k, v] : kv_) {
        out += k;
        out += " = ";
        out += v;
        out += "\n";
    }
    return out;
}

void Report::write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw_io("cannot open report file for writing: " + path);
    f << to_text();
    if (!f) throw_io("failed writing report file: " + path);
}

std::string Report::format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace hbt
