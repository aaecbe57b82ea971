#include "latthom/io.hpp"

#include <cstdio>
#include <fstream>

namespace latthom {

std::string config_hash(const std::string& canonical_text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw numerical_error("IoFailure", "cannot open " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

CsvWriter::CsvWriter(std::string schema, std::string hash, std::vector<std::string> columns) {
    std::ostringstream head;
    head << "# latthom-csv v1 schema=" << schema << " config=" << hash << '\n';
    bool first = true;
    for (const auto& c : columns) {
        if (!first) head << ',';
        first = false;
        head << c;
    }
    head << '\n';
    header_ = head.str();
}

std::string CsvWriter::str() const { return header_ + body_.str(); }

}  // namespace latthom
