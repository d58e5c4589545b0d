// csvio.hpp — deterministic CSV and summary emission. Numbers are printed
// with %.17g so re-runs are byte-identical; headers carry no timestamps or
// worker counts.

#pragma once

#include <complex>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace ergo {

std::string fmt_real(double v);
std::string fmt_hash(std::uint64_t h);
std::uint64_t fnv1a64(const std::string& data);

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& comment_header,
              const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& cells);
    const std::string& path() const { return path_; }

private:
    std::ofstream os_;
    std::string path_;
    std::size_t n_cols_;
};

class Summary {
public:
    void set(const std::string& key, const std::string& value);
    void set_real(const std::string& key, double value);
    void set_int(const std::string& key, long long value);
    void write(const std::string& path) const;
    void bump_warnings() { ++warnings_; }
    int warnings() const { return warnings_; }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    int warnings_{0};
};

}  // namespace ergo
