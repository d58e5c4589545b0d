// config.hpp — experiment configuration: bracketed sections of key = value
// lines, with builders for systems and observables.
//
//   [system]
//   type = torus | cat | product
//   dim = 1            # torus
//   q = 101            # cat
//   factors = torus:1, cat:101, cat:103
//
//   [transform.T]
//   alpha = sqrt2                # one token per torus coordinate
//   cat = 1, 1                   # one power per cat factor (default 0)
//
//   [observable.f1]
//   variant = trigpoly | arcs | product
//   terms = -1:1,0; 2:0.5,-0.25  # freq (space-separated ints) : re , im
//   arcs = 0:0.3, 0.5:0.7 | 0.2:0.4    # '|' separates coordinates
//   part0 = trigpoly 1:1,0       # product systems: one part per factor
//   part1 = char 1 0             # cat parts: char / cochar / ones
//
// Rotation tokens: golden, sqrtM, frac-sqrt(M), p/q, decimal literals, and
// integer multiples like 2*golden.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ergo/systems.hpp"

namespace ergo {

class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_text(const std::string& text, const std::string& origin = "<memory>");

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key, const std::string& def) const;
    long long get_int(const std::string& section, const std::string& key) const;
    long long get_int_or(const std::string& section, const std::string& key, long long def) const;
    double get_real(const std::string& section, const std::string& key) const;
    double get_real_or(const std::string& section, const std::string& key, double def) const;
    std::vector<std::string> section_names(const std::string& prefix) const;
    bool has_section(const std::string& section) const;

    const std::string& text() const { return raw_; }

private:
    struct Entry {
        std::string value;
        int line{0};
    };
    std::map<std::string, std::map<std::string, Entry>> sections_;
    std::string origin_;
    std::string raw_;

    [[noreturn]] void fail(const std::string& what, int line = 0) const;
};

// split helpers shared by the CLI
std::vector<std::string> split_list(const std::string& s, char sep);
std::string trim_copy(const std::string& s);

System build_system(const Config& cfg);
Observable build_observable(const Config& cfg, const System& sys, const std::string& name);

}  // namespace ergo
