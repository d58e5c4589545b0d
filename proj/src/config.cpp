#include "ergo/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace ergo {

std::string trim_copy(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim_copy(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    std::string last = trim_copy(cur);
    if (!last.empty() || !out.empty()) out.push_back(last);
    while (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

void Config::fail(const std::string& what, int line) const {
    std::ostringstream os;
    os << origin_;
    if (line > 0) os << ":" << line;
    os << ": " << what;
    throw std::runtime_error(os.str());
}

Config Config::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_text(buf.str(), path);
}

Config Config::parse_text(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    cfg.raw_ = text;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim_copy(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') cfg.fail("unterminated section header", lineno);
            section = trim_copy(line.substr(1, line.size() - 2));
            if (section.empty()) cfg.fail("empty section name", lineno);
            cfg.sections_[section];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) cfg.fail("expected key = value", lineno);
        if (section.empty()) cfg.fail("key outside any section", lineno);
        std::string key = trim_copy(line.substr(0, eq));
        std::string value = trim_copy(line.substr(eq + 1));
        if (key.empty()) cfg.fail("empty key", lineno);
        cfg.sections_[section][key] = {value, lineno};
    }
    return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

bool Config::has_section(const std::string& section) const { return sections_.count(section) > 0; }

std::string Config::get(const std::string& section, const std::string& key) const {
    auto it = sections_.find(section);
    if (it == sections_.end()) fail("missing section [" + section + "]");
    auto jt = it->second.find(key);
    if (jt == it->second.end()) fail("missing key '" + key + "' in section [" + section + "]");
    return jt->second.value;
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& def) const {
    return has(section, key) ? get(section, key) : def;
}

long long Config::get_int(const std::string& section, const std::string& key) const {
    const std::string v = get(section, key);
    try {
        std::size_t used = 0;
        long long out = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return out;
    } catch (...) {
        auto it = sections_.find(section);
        fail("key '" + key + "' is not an integer: " + v, it->second.at(key).line);
    }
}

long long Config::get_int_or(const std::string& section, const std::string& key, long long def) const {
    return has(section, key) ? get_int(section, key) : def;
}

double Config::get_real(const std::string& section, const std::string& key) const {
    const std::string v = get(section, key);
    try {
        std::size_t used = 0;
        double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return out;
    } catch (...) {
        auto it = sections_.find(section);
        fail("key '" + key + "' is not a real number: " + v, it->second.at(key).line);
    }
}

double Config::get_real_or(const std::string& section, const std::string& key, double def) const {
    return has(section, key) ? get_real(section, key) : def;
}

std::vector<std::string> Config::section_names(const std::string& prefix) const {
    std::vector<std::string> out;
    for (auto& [name, kv] : sections_)
        if (name.rfind(prefix, 0) == 0) out.push_back(name);
    return out;
}

// ------------------------------ builders --------------------------------------

System build_system(const Config& cfg) {
    const std::string type = cfg.get("system", "type");
    System sys;
    if (type == "torus") {
        sys = System::torus(static_cast<int>(cfg.get_int_or("system", "dim", 1)));
    } else if (type == "cat") {
        sys = System::cat_grid(cfg.get_int("system", "q"));
    } else if (type == "product") {
        for (auto& f : split_list(cfg.get("system", "factors"), ',')) {
            auto colon = f.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("factor spec must look like torus:1 or cat:101, got " + f);
            std::string kind = trim_copy(f.substr(0, colon));
            long long arg = std::stoll(f.substr(colon + 1));
            if (kind == "torus")
                sys.factors.push_back(TorusFactor{static_cast<int>(arg)});
            else if (kind == "cat")
                sys.factors.push_back(CatFactor{arg});
            else
                throw std::runtime_error("unknown factor kind '" + kind + "'");
        }
        if (sys.factors.empty()) throw std::runtime_error("product system needs at least one factor");
    } else {
        throw std::runtime_error("unknown system type '" + type + "'");
    }

    for (auto& sec : cfg.section_names("transform.")) {
        std::string label = sec.substr(std::string("transform.").size());
        std::vector<Irrational> alphas;
        if (cfg.has(sec, "alpha"))
            for (auto& tok : split_list(cfg.get(sec, "alpha"), ','))
                alphas.push_back(Irrational::parse(tok));
        std::vector<std::int64_t> cats;
        if (cfg.has(sec, "cat"))
            for (auto& tok : split_list(cfg.get(sec, "cat"), ','))
                cats.push_back(std::stoll(tok));
        sys.add_transform(label, alphas, cats);
    }
    return sys;
}

namespace {

TrigPoly parse_trig_terms(const std::string& spec, int dim) {
    TrigPoly p;
    p.dim = dim;
    for (auto& term : split_list(spec, ';')) {
        if (term.empty()) continue;
        auto colon = term.rfind(':');
        if (colon == std::string::npos)
            throw std::runtime_error("trig term must look like 'k1 k2:re,im', got " + term);
        std::vector<int> k;
        {
            std::istringstream ks(term.substr(0, colon));
            int v;
            while (ks >> v) k.push_back(v);
        }
        if (static_cast<int>(k.size()) != dim)
            throw std::runtime_error("trig term frequency arity mismatch in '" + term + "'");
        auto parts = split_list(term.substr(colon + 1), ',');
        double re = std::stod(parts.at(0));
        double im = parts.size() > 1 ? std::stod(parts.at(1)) : 0.0;
        p.terms[k] += std::complex<double>{re, im};
    }
    return p;
}

ArcUnion parse_arcs(const std::string& spec, int dim) {
    std::vector<std::vector<std::pair<double, double>>> eps;
    for (auto& coord : split_list(spec, '|')) {
        std::vector<std::pair<double, double>> arcs;
        for (auto& a : split_list(coord, ',')) {
            auto colon = a.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("arc must look like lo:hi, got " + a);
            arcs.push_back({std::stod(a.substr(0, colon)), std::stod(a.substr(colon + 1))});
        }
        eps.push_back(std::move(arcs));
    }
    if (static_cast<int>(eps.size()) != dim)
        throw std::runtime_error("arc union covers " + std::to_string(eps.size()) +
                                 " coordinates for a dimension-" + std::to_string(dim) + " factor");
    return ArcUnion::from_endpoints(eps);
}

FactorObservable parse_part(const std::string& spec, const Factor& factor) {
    std::istringstream is(spec);
    std::string kind;
    is >> kind;
    std::string rest;
    std::getline(is, rest);
    rest = trim_copy(rest);
    if (auto* tf = std::get_if<TorusFactor>(&factor)) {
        if (kind == "trigpoly") return parse_trig_terms(rest, tf->dim);
        if (kind == "arcs") return parse_arcs(rest, tf->dim);
        if (kind == "ones") return TrigPoly::constant(tf->dim, {1.0, 0.0});
        throw std::runtime_error("torus factor part must be trigpoly/arcs/ones, got '" + kind + "'");
    }
    auto q = std::get<CatFactor>(factor).q;
    if (kind == "ones") return GridTable::constant(q, {1.0, 0.0});
    if (kind == "char" || kind == "cochar") {
        std::istringstream ks(rest);
        long long k1 = 0, k2 = 0;
        ks >> k1 >> k2;
        return kind == "char" ? GridTable::character(q, k1, k2) : GridTable::coboundary(q, k1, k2);
    }
    throw std::runtime_error("cat factor part must be char/cochar/ones, got '" + kind + "'");
}

}  // namespace

Observable build_observable(const Config& cfg, const System& sys, const std::string& name) {
    const std::string sec = "observable." + name;
    if (!cfg.has_section(sec)) throw std::runtime_error("missing section [" + sec + "]");
    const std::string variant = cfg.get(sec, "variant");
    if (variant == "product") {
        std::vector<FactorObservable> parts;
        for (std::size_t i = 0; i < sys.factors.size(); ++i)
            parts.push_back(parse_part(cfg.get(sec, "part" + std::to_string(i)), sys.factors[i]));
        return Observable::tensor(std::move(parts));
    }
    if (sys.factors.size() != 1)
        throw std::runtime_error("observable '" + name + "' needs variant = product on a product system");
    if (variant == "trigpoly") {
        int dim = std::get<TorusFactor>(sys.factors[0]).dim;
        return Observable::single(parse_trig_terms(cfg.get(sec, "terms"), dim));
    }
    if (variant == "arcs") {
        int dim = std::get<TorusFactor>(sys.factors[0]).dim;
        return Observable::single(parse_arcs(cfg.get(sec, "arcs"), dim));
    }
    if (variant == "grid") {
        return Observable::single(parse_part("char " + cfg.get(sec, "freq"), sys.factors[0]));
    }
    throw std::runtime_error("unknown observable variant '" + variant + "'");
}

}  // namespace ergo
