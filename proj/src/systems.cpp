#include "ergo/systems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ergo {

// ------------------------------ System ---------------------------------------

const Transform& System::transform(const std::string& label) const {
    for (auto& t : transforms)
        if (t.label == label) return t;
    throw std::invalid_argument("unknown transform label '" + label + "'");
}

int System::transform_index(const std::string& label) const {
    for (std::size_t i = 0; i < transforms.size(); ++i)
        if (transforms[i].label == label) return static_cast<int>(i);
    throw std::invalid_argument("unknown transform label '" + label + "'");
}

int System::total_torus_dim() const {
    int d = 0;
    for (auto& f : factors)
        if (auto* t = std::get_if<TorusFactor>(&f)) d += t->dim;
    return d;
}

bool System::has_cat_factor() const {
    for (auto& f : factors)
        if (std::holds_alternative<CatFactor>(f)) return true;
    return false;
}

System System::torus(int dim) {
    if (dim < 1) throw std::invalid_argument("torus dimension must be positive");
    System s;
    s.factors.push_back(TorusFactor{dim});
    return s;
}

System System::cat_grid(std::int64_t q) {
    if (q < 2) throw std::invalid_argument("cat grid order must be >= 2");
    System s;
    s.factors.push_back(CatFactor{q});
    return s;
}

System& System::add_transform(const std::string& label, const std::vector<Irrational>& alphas,
                              const std::vector<std::int64_t>& cat_powers) {
    Transform t;
    t.label = label;
    std::size_t ai = 0, ci = 0;
    for (auto& f : factors) {
        if (auto* tf = std::get_if<TorusFactor>(&f)) {
            RotationAction ra;
            for (int k = 0; k < tf->dim; ++k) {
                if (ai < alphas.size())
                    ra.coords.push_back(RotCoord::from_token(alphas[ai++]));
                else
                    ra.coords.push_back(RotCoord::from_token(Irrational::zero()));
            }
            t.actions.emplace_back(std::move(ra));
        } else {
            std::int64_t p = ci < cat_powers.size() ? cat_powers[ci++] : 0;
            t.actions.emplace_back(CatAction{p});
        }
    }
    if (ai < alphas.size()) throw std::invalid_argument("too many rotation tokens for transform " + label);
    if (ci < cat_powers.size()) throw std::invalid_argument("too many cat powers for transform " + label);
    transforms.push_back(std::move(t));
    return *this;
}

PhasePoint make_torus_point(const System& sys, const std::vector<double>& coords) {
    PhasePoint p;
    std::size_t ci = 0;
    for (auto& f : sys.factors) {
        if (auto* tf = std::get_if<TorusFactor>(&f)) {
            TorusPoint tp;
            for (int k = 0; k < tf->dim; ++k) {
                if (ci >= coords.size()) throw std::invalid_argument("not enough coordinates for phase point");
                tp.x.push_back(Fixed64::from_double(coords[ci++]));
            }
            p.parts.emplace_back(std::move(tp));
        } else {
            throw std::invalid_argument("make_torus_point: system has a grid factor");
        }
    }
    return p;
}

// ------------------------------ TrigPoly -------------------------------------

TrigPoly TrigPoly::constant(int dim, std::complex<double> c) {
    TrigPoly p;
    p.dim = dim;
    if (c != std::complex<double>{0.0, 0.0}) p.terms[std::vector<int>(dim, 0)] = c;
    return p;
}

TrigPoly TrigPoly::character(int dim, const std::vector<int>& freq, std::complex<double> coeff) {
    if (static_cast<int>(freq.size()) != dim) throw std::invalid_argument("character frequency arity mismatch");
    TrigPoly p;
    p.dim = dim;
    p.terms[freq] = coeff;
    return p;
}

double TrigPoly::coeff_l1() const {
    double s = 0;
    for (auto& [k, c] : terms) s += std::abs(c);
    return s;
}

TrigPoly TrigPoly::conjugate() const {
    TrigPoly out;
    out.dim = dim;
    for (auto& [k, c] : terms) {
        std::vector<int> nk(k.size());
        for (std::size_t i = 0; i < k.size(); ++i) nk[i] = -k[i];
        out.terms[nk] = std::conj(c);
    }
    return out;
}

void TrigPoly::prune(double eps) {
    for (auto it = terms.begin(); it != terms.end();)
        it = std::abs(it->second) <= eps ? terms.erase(it) : std::next(it);
}

// ------------------------------ ArcUnion -------------------------------------

namespace {

void normalize_arcs(std::vector<ArcUnion::Arc>& arcs) {
    std::sort(arcs.begin(), arcs.end(), [](auto& a, auto& b) { return a.lo < b.lo; });
    std::vector<ArcUnion::Arc> out;
    for (auto& a : arcs) {
        if (a.hi <= a.lo) continue;
        if (!out.empty() && out.back().hi > a.lo)
            throw std::invalid_argument("arcs within a coordinate must be disjoint");
        if (!out.empty() && out.back().hi == a.lo)
            out.back().hi = a.hi;
        else
            out.push_back(a);
    }
    arcs = std::move(out);
}

}  // namespace

ArcUnion ArcUnion::from_endpoints(const std::vector<std::vector<std::pair<double, double>>>& eps) {
    ArcUnion u;
    for (auto& coord : eps) {
        std::vector<Arc> arcs;
        for (auto& [lo, hi] : coord) {
            if (!(lo >= 0.0 && lo < hi && hi <= 1.0))
                throw std::invalid_argument("arc endpoints must satisfy 0 <= lo < hi <= 1");
            U128 l = static_cast<U128>(Fixed64::from_double(lo).raw);
            U128 h = hi == 1.0 ? kTurn : static_cast<U128>(Fixed64::from_double(hi).raw);
            arcs.push_back(Arc{l, h});
        }
        normalize_arcs(arcs);
        u.coords.push_back(std::move(arcs));
    }
    return u;
}

ArcUnion ArcUnion::full_circle(int dim) {
    ArcUnion u;
    for (int i = 0; i < dim; ++i) u.coords.push_back({Arc{0, kTurn}});
    return u;
}

ArcUnion::U128 ArcUnion::coord_length(int c) const {
    U128 s = 0;
    for (auto& a : coords[c]) s += a.hi - a.lo;
    return s;
}

double ArcUnion::measure() const {
    double m = 1.0;
    for (std::size_t c = 0; c < coords.size(); ++c)
        m *= static_cast<double>(coord_length(static_cast<int>(c))) / static_cast<double>(kTurn);
    return m;
}

// ------------------------------ GridTable ------------------------------------

GridTable GridTable::constant(std::int64_t q, std::complex<double> c) {
    GridTable t;
    t.q = q;
    t.v.assign(static_cast<std::size_t>(q * q), c);
    return t;
}

GridTable GridTable::character(std::int64_t q, long long k1, long long k2) {
    GridTable t;
    t.q = q;
    t.v.resize(static_cast<std::size_t>(q * q));
    const double w = 2.0 * M_PI / static_cast<double>(q);
    for (std::int64_t i = 0; i < q; ++i)
        for (std::int64_t j = 0; j < q; ++j) {
            long long ph = ((k1 % q) * i + (k2 % q) * j) % q;
            if (ph < 0) ph += q;
            t.v[static_cast<std::size_t>(i * q + j)] = {std::cos(w * ph), std::sin(w * ph)};
        }
    return t;
}

GridTable GridTable::coboundary(std::int64_t q, long long k1, long long k2) {
    // M^T = M for ((2,1),(1,1))
    long long m1 = ((2 * k1 + k2) % q + q) % q;
    long long m2 = ((k1 + k2) % q + q) % q;
    GridTable a = character(q, k1, k2);
    GridTable b = character(q, m1, m2);
    for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] -= b.v[i];
    return a;
}

std::complex<double> GridTable::mean() const {
    std::complex<double> s{0.0, 0.0};
    for (auto& z : v) s += z;
    return s / static_cast<double>(v.size());
}

double GridTable::max_abs() const {
    double m = 0;
    for (auto& z : v) m = std::max(m, std::abs(z));
    return m;
}

// ------------------------------ Observable -----------------------------------

double Observable::default_bound(const FactorObservable& p) {
    if (auto* tp = std::get_if<TrigPoly>(&p)) return tp->coeff_l1();
    if (std::get_if<ArcUnion>(&p)) return 1.0;
    return std::get<GridTable>(p).max_abs();
}

Observable Observable::single(FactorObservable part, double bound_hint) {
    Observable o;
    o.bound = bound_hint >= 0 ? bound_hint : default_bound(part);
    o.parts.push_back(std::move(part));
    return o;
}

Observable Observable::tensor(std::vector<FactorObservable> parts, double bound_hint) {
    Observable o;
    if (bound_hint >= 0) {
        o.bound = bound_hint;
    } else {
        o.bound = 1.0;
        for (auto& p : parts) o.bound *= default_bound(p);
    }
    o.parts = std::move(parts);
    return o;
}

Observable Observable::conjugate() const {
    Observable o;
    o.bound = bound;
    for (auto& p : parts) {
        if (auto* tp = std::get_if<TrigPoly>(&p)) {
            o.parts.emplace_back(tp->conjugate());
        } else if (auto* au = std::get_if<ArcUnion>(&p)) {
            o.parts.emplace_back(*au);  // real-valued
        } else {
            GridTable g = std::get<GridTable>(p);
            for (auto& z : g.v) z = std::conj(z);
            o.parts.emplace_back(std::move(g));
        }
    }
    return o;
}

// ------------------------------ cat core -------------------------------------

namespace {
CatMatrix cat_mul(std::int64_t q, const CatMatrix& x, const CatMatrix& y) {
    auto m = [q](std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
        return ((a * b + c * d) % q + q) % q;
    };
    return CatMatrix{m(x.a, y.a, x.b, y.c), m(x.a, y.b, x.b, y.d), m(x.c, y.a, x.d, y.c), m(x.c, y.b, x.d, y.d)};
}
}  // namespace

CatMatrix cat_power(std::int64_t q, long long n) {
    CatMatrix base = n >= 0 ? CatMatrix{2 % q, 1 % q, 1 % q, 1 % q}
                            : CatMatrix{1 % q, (q - 1) % q, (q - 1) % q, 2 % q};  // inverse ((1,-1),(-1,2))
    unsigned long long e = n >= 0 ? static_cast<unsigned long long>(n) : static_cast<unsigned long long>(-(n + 1)) + 1ull;
    CatMatrix r{1 % q, 0, 0, 1 % q};
    while (e) {
        if (e & 1ull) r = cat_mul(q, r, base);
        base = cat_mul(q, base, base);
        e >>= 1;
    }
    return r;
}

std::int64_t cat_matrix_order(std::int64_t q) {
    CatMatrix m{2 % q, 1 % q, 1 % q, 1 % q};
    CatMatrix p = m;
    std::int64_t n = 1;
    const std::int64_t cap = 10 * q + 10;
    while (!(p.a == 1 % q && p.b == 0 && p.c == 0 && p.d == 1 % q)) {
        p = cat_mul(q, p, m);
        if (++n > cap) throw std::runtime_error("cat matrix order exceeded cap");
    }
    return n;
}

GridPoint cat_apply(std::int64_t q, const CatMatrix& m, GridPoint p) {
    auto i = ((m.a * p.i + m.b * p.j) % q + q) % q;
    auto j = ((m.c * p.i + m.d * p.j) % q + q) % q;
    return GridPoint{i, j};
}

// ------------------------------ apply ----------------------------------------

PhasePoint apply(const System& sys, const std::string& label, long long n, const PhasePoint& p) {
    const Transform& t = sys.transform(label);
    if (p.parts.size() != sys.factors.size())
        throw std::invalid_argument("phase point does not match system factors");
    PhasePoint out;
    out.parts.reserve(p.parts.size());
    for (std::size_t f = 0; f < p.parts.size(); ++f) {
        if (auto* ra = std::get_if<RotationAction>(&t.actions[f])) {
            const auto& tp = std::get<TorusPoint>(p.parts[f]);
            if (tp.x.size() != ra->coords.size()) throw std::invalid_argument("point arity mismatch");
            TorusPoint np;
            np.x.reserve(tp.x.size());
            for (std::size_t k = 0; k < tp.x.size(); ++k)
                np.x.push_back(tp.x[k] + ra->coords[k].step.times(n));
            out.parts.emplace_back(std::move(np));
        } else {
            const auto& ca = std::get<CatAction>(t.actions[f]);
            const auto& gp = std::get<GridPoint>(p.parts[f]);
            auto q = std::get<CatFactor>(sys.factors[f]).q;
            if (gp.i < 0 || gp.i >= q || gp.j < 0 || gp.j >= q)
                throw std::invalid_argument("grid point outside (Z/q)^2");
            out.parts.emplace_back(cat_apply(q, cat_power(q, n * ca.power), gp));
        }
    }
    return out;
}

// ------------------------------ integrate ------------------------------------

std::complex<double> integrate(const System& sys, const Observable& f) {
    if (f.parts.size() != sys.factors.size())
        throw std::invalid_argument("observable does not match system factors");
    std::complex<double> acc{1.0, 0.0};
    for (std::size_t i = 0; i < f.parts.size(); ++i) {
        const auto& part = f.parts[i];
        if (auto* tf = std::get_if<TorusFactor>(&sys.factors[i])) {
            if (auto* tp = std::get_if<TrigPoly>(&part)) {
                if (tp->dim != tf->dim) throw std::invalid_argument("trig poly dimension mismatch");
                acc *= tp->coeff(std::vector<int>(tf->dim, 0));
            } else if (auto* au = std::get_if<ArcUnion>(&part)) {
                if (static_cast<int>(au->coords.size()) != tf->dim)
                    throw std::invalid_argument("arc union dimension mismatch");
                acc *= au->measure();
            } else {
                throw std::invalid_argument("grid table observable on a torus factor");
            }
        } else {
            auto* gt = std::get_if<GridTable>(&part);
            if (!gt) throw std::invalid_argument("cat factor requires a grid table observable");
            if (gt->q != std::get<CatFactor>(sys.factors[i]).q)
                throw std::invalid_argument("grid table order mismatch");
            acc *= gt->mean();
        }
    }
    return acc;
}

Observable constant_observable(const System& sys, std::complex<double> c) {
    std::vector<FactorObservable> parts;
    for (auto& f : sys.factors) {
        if (auto* tf = std::get_if<TorusFactor>(&f))
            parts.emplace_back(TrigPoly::constant(tf->dim, c));
        else
            parts.emplace_back(GridTable::constant(std::get<CatFactor>(f).q, c));
        c = {1.0, 0.0};  // put the scalar on the first factor only
    }
    return Observable::tensor(std::move(parts));
}

// ------------------------------ product --------------------------------------

namespace {

std::vector<ArcUnion::Arc> intersect_arcs(const std::vector<ArcUnion::Arc>& a,
                                          const std::vector<ArcUnion::Arc>& b) {
    std::vector<ArcUnion::Arc> out;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        auto lo = std::max(a[i].lo, b[j].lo);
        auto hi = std::min(a[i].hi, b[j].hi);
        if (hi > lo) out.push_back({lo, hi});
        if (a[i].hi < b[j].hi) ++i; else ++j;
    }
    return out;
}

FactorObservable product_part(const FactorObservable& x, const FactorObservable& y) {
    if (auto* tx = std::get_if<TrigPoly>(&x)) {
        auto* ty = std::get_if<TrigPoly>(&y);
        if (!ty) throw std::invalid_argument("unsupported observable product (TrigPoly x non-TrigPoly)");
        if (tx->dim != ty->dim) throw std::invalid_argument("trig poly dimension mismatch in product");
        TrigPoly out;
        out.dim = tx->dim;
        for (auto& [k1, c1] : tx->terms)
            for (auto& [k2, c2] : ty->terms) {
                std::vector<int> k(k1.size());
                for (std::size_t d = 0; d < k.size(); ++d) k[d] = k1[d] + k2[d];
                out.terms[k] += c1 * c2;
            }
        out.prune(0.0);
        return out;
    }
    if (auto* ax = std::get_if<ArcUnion>(&x)) {
        auto* ay = std::get_if<ArcUnion>(&y);
        if (!ay) throw std::invalid_argument("unsupported observable product (ArcUnion x non-ArcUnion)");
        if (ax->coords.size() != ay->coords.size())
            throw std::invalid_argument("arc union dimension mismatch in product");
        ArcUnion out;
        for (std::size_t c = 0; c < ax->coords.size(); ++c)
            out.coords.push_back(intersect_arcs(ax->coords[c], ay->coords[c]));
        return out;
    }
    const auto& gx = std::get<GridTable>(x);
    auto* gy = std::get_if<GridTable>(&y);
    if (!gy) throw std::invalid_argument("unsupported observable product (GridTable x non-GridTable)");
    if (gx.q != gy->q) throw std::invalid_argument("grid table order mismatch in product");
    GridTable out;
    out.q = gx.q;
    out.v.resize(gx.v.size());
    for (std::size_t i = 0; i < gx.v.size(); ++i) out.v[i] = gx.v[i] * gy->v[i];
    return out;
}

}  // namespace

Observable pointwise_product(const Observable& f, const Observable& g) {
    if (f.parts.size() != g.parts.size())
        throw std::invalid_argument("observable factor arity mismatch in product");
    Observable out;
    out.bound = f.bound * g.bound;
    for (std::size_t i = 0; i < f.parts.size(); ++i)
        out.parts.push_back(product_part(f.parts[i], g.parts[i]));
    return out;
}

// ------------------------------ translate ------------------------------------

namespace {

std::vector<ArcUnion::Arc> shift_arcs(const std::vector<ArcUnion::Arc>& arcs, std::uint64_t minus_t) {
    // 1_S(x + t) = 1_{S - t}(x); shift endpoints by -t with wrap splitting
    std::vector<ArcUnion::Arc> out;
    for (auto& a : arcs) {
        ArcUnion::U128 len = a.hi - a.lo;
        std::uint64_t lo64 = static_cast<std::uint64_t>(a.lo) - minus_t;
        ArcUnion::U128 lo = lo64;
        ArcUnion::U128 hi = lo + len;
        if (hi <= ArcUnion::kTurn) {
            out.push_back({lo, hi});
        } else {
            out.push_back({lo, ArcUnion::kTurn});
            out.push_back({0, hi - ArcUnion::kTurn});
        }
    }
    std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.lo < b.lo; });
    return out;
}

}  // namespace

Observable translate(const System& sys, const Observable& f, const std::string& label, long long n) {
    const Transform& t = sys.transform(label);
    if (f.parts.size() != sys.factors.size())
        throw std::invalid_argument("observable does not match system factors");
    Observable out;
    out.bound = f.bound;
    for (std::size_t i = 0; i < f.parts.size(); ++i) {
        if (auto* ra = std::get_if<RotationAction>(&t.actions[i])) {
            if (auto* tp = std::get_if<TrigPoly>(&f.parts[i])) {
                TrigPoly np;
                np.dim = tp->dim;
                for (auto& [k, c] : tp->terms) {
                    Fixed64 phase{0};
                    for (std::size_t d = 0; d < k.size(); ++d)
                        phase = phase + ra->coords[d].step.times(n).times(k[d]);
                    np.terms[k] = phase.raw == 0 ? c : c * unit_phase(phase);
                }
                out.parts.emplace_back(std::move(np));
            } else if (auto* au = std::get_if<ArcUnion>(&f.parts[i])) {
                ArcUnion nu;
                for (std::size_t d = 0; d < au->coords.size(); ++d)
                    nu.coords.push_back(shift_arcs(au->coords[d], ra->coords[d].step.times(n).raw));
                out.parts.emplace_back(std::move(nu));
            } else {
                throw std::invalid_argument("grid table observable on a torus factor");
            }
        } else {
            const auto& ca = std::get<CatAction>(t.actions[i]);
            auto* gt = std::get_if<GridTable>(&f.parts[i]);
            if (!gt) throw std::invalid_argument("cat factor requires a grid table observable");
            auto q = gt->q;
            if (n * ca.power == 0) {
                out.parts.emplace_back(*gt);
            } else {
                CatMatrix m = cat_power(q, n * ca.power);
                GridTable ng;
                ng.q = q;
                ng.v.resize(gt->v.size());
                for (std::int64_t a = 0; a < q; ++a)
                    for (std::int64_t b = 0; b < q; ++b) {
                        GridPoint img = cat_apply(q, m, GridPoint{a, b});
                        ng.v[static_cast<std::size_t>(a * q + b)] =
                            gt->v[static_cast<std::size_t>(img.i * q + img.j)];
                    }
                out.parts.emplace_back(std::move(ng));
            }
        }
    }
    return out;
}

// ------------------------------ eval ------------------------------------------

std::complex<double> eval(const System& sys, const Observable& f, const PhasePoint& p) {
    if (f.parts.size() != sys.factors.size())
        throw std::invalid_argument("observable does not match system factors");
    std::complex<double> acc{1.0, 0.0};
    for (std::size_t i = 0; i < f.parts.size(); ++i) {
        if (auto* tp = std::get_if<TrigPoly>(&f.parts[i])) {
            const auto& x = std::get<TorusPoint>(p.parts[i]);
            std::complex<double> s{0.0, 0.0};
            for (auto& [k, c] : tp->terms) {
                Fixed64 phase{0};
                for (std::size_t d = 0; d < k.size(); ++d) phase = phase + x.x[d].times(k[d]);
                s += c * unit_phase(phase);
            }
            acc *= s;
        } else if (auto* au = std::get_if<ArcUnion>(&f.parts[i])) {
            const auto& x = std::get<TorusPoint>(p.parts[i]);
            double ind = 1.0;
            for (std::size_t d = 0; d < au->coords.size(); ++d) {
                ArcUnion::U128 v = x.x[d].raw;
                bool inside = false;
                for (auto& a : au->coords[d])
                    if (v >= a.lo && v < a.hi) { inside = true; break; }
                if (!inside) { ind = 0.0; break; }
            }
            acc *= ind;
        } else {
            const auto& g = std::get<GridTable>(f.parts[i]);
            const auto& gp = std::get<GridPoint>(p.parts[i]);
            acc *= g.v[static_cast<std::size_t>(gp.i * g.q + gp.j)];
        }
    }
    return acc;
}

// ------------------------------ ergodicity audit ------------------------------

namespace {

struct ComboRotation {
    std::vector<Fixed64> steps;      // concatenated torus coordinates
    std::vector<QuadExpr> sym;
    bool all_symbolic{true};
    bool touches_cat{false};
};

ComboRotation combine(const System& sys, const std::vector<std::pair<std::string, long long>>& combo) {
    ComboRotation out;
    int m = sys.total_torus_dim();
    out.steps.assign(m, Fixed64{0});
    out.sym.assign(m, QuadExpr{});
    for (auto& [label, e] : combo) {
        const Transform& t = sys.transform(label);
        int d = 0;
        for (std::size_t f = 0; f < t.actions.size(); ++f) {
            if (auto* ra = std::get_if<RotationAction>(&t.actions[f])) {
                for (auto& rc : ra->coords) {
                    out.steps[d] = out.steps[d] + rc.step.times(e);
                    out.sym[d] += rc.sym.scaled(e);
                    if (!rc.sym.exact) out.all_symbolic = false;
                    ++d;
                }
            } else if (std::get<CatAction>(t.actions[f]).power * e != 0) {
                out.touches_cat = true;
            }
        }
    }
    return out;
}

// rational kernel emptiness for the radical-coefficient matrix:
// a rotation by v in T^m is ergodic iff no nonzero integer k has k.v rational,
// i.e. iff the only rational solution of sum_j k_j * rad_coeff(j, m) = 0 for
// all radicands m is k = 0.
bool symbolic_ergodic(const std::vector<QuadExpr>& v) {
    const int m = static_cast<int>(v.size());
    std::vector<long long> rads;
    for (auto& q : v)
        for (auto& [r, c] : q.radicals)
            if (!c.is_zero() && std::find(rads.begin(), rads.end(), r) == rads.end()) rads.push_back(r);
    // rows: one per radicand; columns: coordinates
    std::vector<std::vector<double>> a(rads.size(), std::vector<double>(m, 0.0));
    for (int j = 0; j < m; ++j)
        for (std::size_t ri = 0; ri < rads.size(); ++ri) {
            auto it = v[j].radicals.find(rads[ri]);
            if (it != v[j].radicals.end()) a[ri][j] = it->second.value();
        }
    // rank via Gaussian elimination; coefficients are exact small rationals so
    // double pivoting with a tiny threshold is reliable here
    int rank = 0;
    int rows = static_cast<int>(rads.size());
    for (int col = 0; col < m && rank < rows; ++col) {
        int piv = -1;
        double best = 1e-12;
        for (int r = rank; r < rows; ++r)
            if (std::abs(a[r][col]) > best) { best = std::abs(a[r][col]); piv = r; }
        if (piv < 0) continue;
        std::swap(a[rank], a[piv]);
        for (int r = 0; r < rows; ++r) {
            if (r == rank || a[r][col] == 0.0) continue;
            double f = a[r][col] / a[rank][col];
            for (int c2 = col; c2 < m; ++c2) a[r][c2] -= f * a[rank][c2];
        }
        ++rank;
    }
    // kernel trivial iff rank == m
    return rank == m;
}

}  // namespace

AuditEntry audit_combo(const System& sys, const std::vector<std::pair<std::string, long long>>& combo,
                       const AuditOptions& opt) {
    AuditEntry e;
    {
        std::ostringstream os;
        bool first = true;
        for (auto& [l, k] : combo) {
            if (!first) os << " ";
            os << l << "^" << k;
            first = false;
        }
        e.combo_spelling = os.str();
    }
    ComboRotation cr = combine(sys, combo);
    if (cr.touches_cat) {
        e.heuristic = true;
        e.note = "cat factor action excluded from rotation independence check";
    }
    if (cr.steps.empty()) {
        e.verdict = AuditVerdict::Fail;
        e.method = "symbolic";
        e.note += (e.note.empty() ? "" : "; ") + std::string("no rotation coordinates");
        return e;
    }
    if (cr.all_symbolic) {
        e.method = "symbolic";
        e.verdict = symbolic_ergodic(cr.sym) ? AuditVerdict::Pass : AuditVerdict::Fail;
    } else {
        e.heuristic = true;
        const int m = static_cast<int>(cr.steps.size());
        long long k_cap = opt.numeric_k;
        // keep the enumeration budget near 2 * numeric_k points total
        while (m > 1 && std::pow(2.0 * static_cast<double>(k_cap) + 1.0, m) > 2.0 * static_cast<double>(opt.numeric_k) + 1.0)
            k_cap = std::max<long long>(1, k_cap / 2);
        std::ostringstream os;
        os << "numeric(K=" << k_cap << ",tol=" << opt.numeric_tol << ")";
        e.method = os.str();
        double best = 1.0;
        std::vector<long long> k(m, -k_cap);
        for (;;) {
            bool zero = true;
            for (auto kk : k) if (kk) { zero = false; break; }
            if (!zero) {
                Fixed64 dot{0};
                for (int j = 0; j < m; ++j) dot = dot + cr.steps[j].times(k[j]);
                best = std::min(best, dot.dist_to_integer());
            }
            int j = 0;
            while (j < m && ++k[j] > k_cap) k[j++] = -k_cap;
            if (j == m) break;
        }
        e.numeric_min_dist = best;
        e.verdict = best > opt.numeric_tol ? AuditVerdict::Pass : AuditVerdict::Inconclusive;
        if (e.verdict == AuditVerdict::Inconclusive)
            e.note += (e.note.empty() ? "" : "; ") + std::string("numeric check cannot separate near-resonance from rationality");
    }
    return e;
}

AuditReport ergodicity_audit(const System& sys, const std::vector<ErgodicityClaim>& claims,
                             const AuditOptions& opt) {
    AuditReport rep;
    for (auto& c : claims) {
        AuditEntry e = audit_combo(sys, c.combo, opt);
        bool observed_ergodic = e.verdict == AuditVerdict::Pass;
        e.matches_expected = (e.verdict != AuditVerdict::Inconclusive) && (observed_ergodic == c.expect_ergodic);
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

}  // namespace ergo
