#include "ergo/csvio.hpp"

#include <cstdio>
#include <stdexcept>

namespace ergo {

std::string fmt_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fmt_hash(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::string& comment_header,
                     const std::vector<std::string>& columns)
    : os_(path), path_(path), n_cols_(columns.size()) {
    if (!os_) throw std::runtime_error("cannot open for writing: " + path);
    if (!comment_header.empty()) os_ << "# " << comment_header << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
    os_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != n_cols_) throw std::logic_error("csv row arity mismatch in " + path_);
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << "\n";
}

void Summary::set(const std::string& key, const std::string& value) {
    entries_.push_back({key, value});
}
void Summary::set_real(const std::string& key, double value) { set(key, fmt_real(value)); }
void Summary::set_int(const std::string& key, long long value) { set(key, std::to_string(value)); }

void Summary::write(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    for (auto& [k, v] : entries_) os << k << " = " << v << "\n";
    os << "warnings = " << warnings_ << "\n";
}

}  // namespace ergo
