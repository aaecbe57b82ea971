#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "latthom/common.hpp"

namespace latthom {

// FNV-1a over the canonical config text; stamped into every output header so
// runs are attributable to their exact configuration.
std::string config_hash(const std::string& canonical_text);

// Writes content to path atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// CSV emitter with the versioned header comment line:
//   # latthom-csv v1 schema=<name> config=<hash>
class CsvWriter {
public:
    CsvWriter(std::string schema, std::string config_hash, std::vector<std::string> columns);

    template <typename... Ts>
    void row(const Ts&... values) {
        bool first = true;
        ((append_cell(first, values)), ...);
        body_ << '\n';
    }

    std::string str() const;
    void save(const std::filesystem::path& path) const { write_file_atomic(path, str()); }

private:
    template <typename T>
    void append_cell(bool& first, const T& v) {
        if (!first) body_ << ',';
        first = false;
        if constexpr (std::is_floating_point_v<T>) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", static_cast<double>(v));
            body_ << buf;
        } else {
            body_ << v;
        }
    }

    std::string header_;
    std::ostringstream body_;
};

}  // namespace latthom
