#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hbt {

// Flat key-value report. The machine-readable schema: UTF-8 lines
// "key = value", first line always "report_schema = 1". Values are written
// with %.9g so identical inputs serialize byte-identically.
class Report {
public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, std::int64_t value);
    void set(const std::string& key, std::uint64_t value);

    std::optional<std::string> get(const std::string& key) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const { return kv_; }

    std::string to_text() const;
    void write(const std::string& path) const;

    static std::string format_double(double v);

private:
    std::vector<std::pair<std::string, std::string>> kv_;
};

}  // namespace hbt
