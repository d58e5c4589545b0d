#include "ergo/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "ergo/parallel.hpp"

namespace ergo {

// ------------------------------ PolynomialMap --------------------------------

PolynomialMap PolynomialMap::linear_in(int d, int coord) {
    PolynomialMap p;
    p.coords.assign(static_cast<std::size_t>(d), {});
    p.coords[static_cast<std::size_t>(coord)] = {0, 1};
    return p;
}

long long PolynomialMap::eval_coord(int c, long long n) const {
    const auto& cs = coords[static_cast<std::size_t>(c)];
    // Horner, exact; rejects values that leave int64
    __int128 acc = 0;
    long double shadow = 0.0L;
    for (auto it = cs.rbegin(); it != cs.rend(); ++it) {
        shadow = shadow * static_cast<long double>(n) + static_cast<long double>(*it);
        if (shadow > 1.5e26L || shadow < -1.5e26L)
            throw std::overflow_error("polynomial exponent overflow");
        acc = acc * n + *it;
    }
    if (acc > INT64_MAX || acc < INT64_MIN) throw std::overflow_error("polynomial exponent overflow");
    return static_cast<long long>(acc);
}

bool PolynomialMap::coord_nonconstant(int c) const {
    const auto& cs = coords[static_cast<std::size_t>(c)];
    for (std::size_t d = 1; d < cs.size(); ++d)
        if (cs[d] != 0) return true;
    return false;
}

bool PolynomialMap::nonconstant() const {
    for (int c = 0; c < dim(); ++c)
        if (coord_nonconstant(c)) return true;
    return false;
}

bool PolynomialMap::difference_nonconstant(const PolynomialMap& a, const PolynomialMap& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("polynomial map dimension mismatch");
    for (int c = 0; c < a.dim(); ++c) {
        const auto& ca = a.coords[static_cast<std::size_t>(c)];
        const auto& cb = b.coords[static_cast<std::size_t>(c)];
        std::size_t deg = std::max(ca.size(), cb.size());
        for (std::size_t d = 1; d < deg; ++d) {
            long long va = d < ca.size() ? ca[d] : 0;
            long long vb = d < cb.size() ? cb[d] : 0;
            if (va != vb) return true;
        }
    }
    return false;
}

// ------------------------------ evaluator ------------------------------------

namespace {

constexpr std::size_t kTupleBudget = 2'000'000;

// exponent polynomial table: exps[j][t] is the power of transform t applied to
// observable j. Observable 0 always has all-zero polynomials.
struct ExponentTable {
    std::vector<std::vector<std::vector<long long>>> polys;  // [obs][transform] -> coeffs
    int n_obs{0};
    int n_tr{0};

    long long eval(int j, int t, long long n) const {
        const auto& cs = polys[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)];
        if (cs.empty()) return 0;
        __int128 acc = 0;
        for (auto it = cs.rbegin(); it != cs.rend(); ++it) acc = acc * n + *it;
        if (acc > INT64_MAX || acc < INT64_MIN) throw std::overflow_error("exponent overflow");
        return static_cast<long long>(acc);
    }
    bool zero(int j, int t) const {
        for (auto c : polys[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)])
            if (c) return false;
        return true;
    }
};

struct SlopeTerm {
    std::uint64_t slope;  // freq dot transform-step, as a turn fraction
    int j, t;
};

struct TorusTuple {
    std::complex<double> amp;
    std::vector<SlopeTerm> slopes;
    std::vector<int> total_freq;  // used by AverageFunction accumulation
};

struct TorusFactorPlan {
    std::vector<TorusTuple> tuples;  // only zero-total-frequency tuples when integrating
};

struct CatFactorPlan {
    std::int64_t q{0};
    std::int64_t period{1};
    std::vector<const GridTable*> tables;                     // per observable
    std::vector<std::vector<std::int64_t>> power;             // [obs][transform]
    mutable std::map<std::vector<std::int64_t>, std::complex<double>> cache;
    mutable std::mutex mu;

    std::vector<std::int64_t> residues(const ExponentTable& e, long long n) const {
        std::vector<std::int64_t> r(tables.size(), 0);
        for (std::size_t j = 0; j < tables.size(); ++j) {
            __int128 tot = 0;
            for (int t = 0; t < e.n_tr; ++t)
                if (power[j][static_cast<std::size_t>(t)] != 0 && !e.zero(static_cast<int>(j), t))
                    tot += static_cast<__int128>(e.eval(static_cast<int>(j), t, n)) *
                           power[j][static_cast<std::size_t>(t)];
            r[j] = static_cast<std::int64_t>(((tot % period) + period) % period);
        }
        return r;
    }

    std::complex<double> integral(const std::vector<std::int64_t>& res) const {
        {
            std::lock_guard<std::mutex> lk(mu);
            auto it = cache.find(res);
            if (it != cache.end()) return it->second;
        }
        std::vector<CatMatrix> mats(tables.size());
        for (std::size_t j = 0; j < tables.size(); ++j) mats[j] = cat_power(q, res[j]);
        NeumaierCSum s;
        for (std::int64_t i = 0; i < q; ++i)
            for (std::int64_t jj = 0; jj < q; ++jj) {
                std::complex<double> prod{1.0, 0.0};
                for (std::size_t j = 0; j < tables.size(); ++j) {
                    GridPoint img = cat_apply(q, mats[j], GridPoint{i, jj});
                    prod *= tables[j]->v[static_cast<std::size_t>(img.i * q + img.j)];
                }
                s.add(prod);
            }
        std::complex<double> val = s.value() / static_cast<double>(q * q);
        std::lock_guard<std::mutex> lk(mu);
        cache.emplace(res, val);
        return val;
    }
};

struct ArcFactorPlan {
    const TorusFactor* tf{nullptr};
    std::vector<const ArcUnion*> unions;                   // per observable
    std::vector<std::vector<std::vector<Fixed64>>> steps;  // [obs][transform] -> per-coordinate step
};

// translated arc sweep on one coordinate: intersect the shifted unions
ArcUnion::U128 intersect_translated(const std::vector<const ArcUnion*>& unions,
                                    const std::vector<std::uint64_t>& offsets, int coord) {
    auto shift = [](const std::vector<ArcUnion::Arc>& arcs, std::uint64_t off) {
        std::vector<ArcUnion::Arc> out;
        out.reserve(arcs.size() + 1);
        for (auto& a : arcs) {
            ArcUnion::U128 len = a.hi - a.lo;
            std::uint64_t lo64 = static_cast<std::uint64_t>(a.lo) - off;
            ArcUnion::U128 lo = lo64, hi = lo + len;
            if (hi <= ArcUnion::kTurn) {
                out.push_back({lo, hi});
            } else {
                out.push_back({lo, ArcUnion::kTurn});
                out.push_back({0, hi - ArcUnion::kTurn});
            }
        }
        std::sort(out.begin(), out.end(), [](auto& x, auto& y) { return x.lo < y.lo; });
        return out;
    };
    std::vector<ArcUnion::Arc> cur = shift(unions[0]->coords[static_cast<std::size_t>(coord)], offsets[0]);
    for (std::size_t u = 1; u < unions.size() && !cur.empty(); ++u) {
        auto other = shift(unions[u]->coords[static_cast<std::size_t>(coord)], offsets[u]);
        std::vector<ArcUnion::Arc> next;
        std::size_t i = 0, j = 0;
        while (i < cur.size() && j < other.size()) {
            auto lo = std::max(cur[i].lo, other[j].lo);
            auto hi = std::min(cur[i].hi, other[j].hi);
            if (hi > lo) next.push_back({lo, hi});
            if (cur[i].hi < other[j].hi) ++i; else ++j;
        }
        cur = std::move(next);
    }
    ArcUnion::U128 len = 0;
    for (auto& a : cur) len += a.hi - a.lo;
    return len;
}

class Evaluator {
public:
    Evaluator(const System& sys, std::span<const Observable> fs,
              std::span<const std::string> transforms, ExponentTable exps)
        : sys_(sys), exps_(std::move(exps)) {
        for (auto& f : fs) {
            if (f.parts.size() != sys.factors.size())
                throw std::invalid_argument("observable does not match system factors");
            obs_.push_back(&f);
        }
        for (auto& t : transforms) tr_.push_back(&sys.transform(t));
        build_plans();
    }

    std::complex<double> eval(long long n) const {
        std::complex<double> acc{1.0, 0.0};
        std::size_t torus_i = 0, cat_i = 0, arc_i = 0;
        for (auto kind : plan_kinds_) {
            if (kind == 0) {
                const auto& plan = torus_plans_[torus_i++];
                std::complex<double> s{0.0, 0.0};
                for (auto& tp : plan.tuples) {
                    std::uint64_t angle = 0;
                    for (auto& sl : tp.slopes)
                        angle += sl.slope * static_cast<std::uint64_t>(exps_.eval(sl.j, sl.t, n));
                    s += angle == 0 ? tp.amp : tp.amp * unit_phase(Fixed64{angle});
                }
                acc *= s;
            } else if (kind == 1) {
                const auto& plan = cat_plans_[cat_i++];
                acc *= plan->integral(plan->residues(exps_, n));
            } else {
                const auto& plan = arc_plans_[arc_i++];
                double m = 1.0;
                for (int c = 0; c < plan.tf->dim && m != 0.0; ++c) {
                    std::vector<std::uint64_t> offs(plan.unions.size(), 0);
                    for (std::size_t j = 0; j < plan.unions.size(); ++j) {
                        std::uint64_t o = 0;
                        for (int t = 0; t < exps_.n_tr; ++t) {
                            Fixed64 st = plan.steps[j][static_cast<std::size_t>(t)][static_cast<std::size_t>(c)];
                            if (st.raw && !exps_.zero(static_cast<int>(j), t))
                                o += st.times(exps_.eval(static_cast<int>(j), t, n)).raw;
                        }
                        offs[j] = o;
                    }
                    m *= static_cast<double>(intersect_translated(plan.unions, offs, c)) /
                         static_cast<double>(ArcUnion::kTurn);
                }
                acc *= m;
            }
        }
        return acc;
    }

private:
    void build_plans() {
        for (std::size_t fi = 0; fi < sys_.factors.size(); ++fi) {
            if (auto* tf = std::get_if<TorusFactor>(&sys_.factors[fi])) {
                bool any_arc = false, any_trig = false;
                for (auto* o : obs_) {
                    if (std::holds_alternative<ArcUnion>(o->parts[fi])) any_arc = true;
                    if (std::holds_alternative<TrigPoly>(o->parts[fi])) any_trig = true;
                }
                if (any_arc && any_trig)
                    throw std::invalid_argument("mixed TrigPoly/ArcIndicator observables on one factor");
                if (any_arc) {
                    plan_kinds_.push_back(2);
                    arc_plans_.push_back(build_arc_plan(fi, *tf));
                } else {
                    plan_kinds_.push_back(0);
                    torus_plans_.push_back(build_torus_plan(fi, *tf));
                }
            } else {
                plan_kinds_.push_back(1);
                cat_plans_.push_back(build_cat_plan(fi, std::get<CatFactor>(sys_.factors[fi])));
            }
        }
    }

    TorusFactorPlan build_torus_plan(std::size_t fi, const TorusFactor& tf) {
        TorusFactorPlan plan;
        const std::size_t K = obs_.size();
        std::vector<std::vector<std::pair<const std::vector<int>*, std::complex<double>>>> supp(K);
        std::size_t combos = 1;
        for (std::size_t j = 0; j < K; ++j) {
            auto* tp = std::get_if<TrigPoly>(&obs_[j]->parts[fi]);
            if (!tp) throw std::invalid_argument("expected trig-poly observable on torus factor");
            if (tp->dim != tf.dim) throw std::invalid_argument("trig poly dimension mismatch");
            for (auto& [k, c] : tp->terms) supp[j].push_back({&k, c});
            if (supp[j].empty()) return plan;  // zero observable: empty tuple list
            if (j + 1 < K) combos *= supp[j].size();
            if (combos > kTupleBudget) throw std::runtime_error("trig-poly tuple budget exceeded");
        }
        const auto* last_tp = std::get_if<TrigPoly>(&obs_[K - 1]->parts[fi]);
        // enumerate all but the last observable; the last frequency is forced
        std::vector<std::size_t> idx(K - 1, 0);
        std::vector<int> sum(tf.dim, 0);
        for (;;) {
            std::fill(sum.begin(), sum.end(), 0);
            std::complex<double> amp{1.0, 0.0};
            for (std::size_t j = 0; j + 1 < K; ++j) {
                auto& [kv, c] = supp[j][idx[j]];
                for (int d = 0; d < tf.dim; ++d) sum[static_cast<std::size_t>(d)] += (*kv)[static_cast<std::size_t>(d)];
                amp *= c;
            }
            std::vector<int> need(tf.dim);
            for (int d = 0; d < tf.dim; ++d) need[static_cast<std::size_t>(d)] = -sum[static_cast<std::size_t>(d)];
            auto it = last_tp->terms.find(need);
            if (it != last_tp->terms.end())

                emit_tuple(plan, fi, tf, idx, supp, amp * it->second, need);
            // odometer
            std::size_t j = 0;
            while (j + 1 <= K - 1 && j < idx.size() && ++idx[j] == supp[j].size()) idx[j++] = 0;
            if (K == 1 || j == idx.size()) break;
        }
        return plan;
    }

    void emit_tuple(TorusFactorPlan& plan, std::size_t fi, const TorusFactor& tf,
                    const std::vector<std::size_t>& idx,
                    const std::vector<std::vector<std::pair<const std::vector<int>*, std::complex<double>>>>& supp,
                    std::complex<double> amp, const std::vector<int>& last_freq) {
        TorusTuple tup;
        tup.amp = amp;
        const std::size_t K = obs_.size();
        for (std::size_t j = 0; j < K; ++j) {
            const std::vector<int>& k = (j + 1 < K) ? *supp[j][idx[j]].first : last_freq;
            if (j == 0) continue;  // f0 untranslated
            for (std::size_t t = 0; t < tr_.size(); ++t) {
                if (exps_.zero(static_cast<int>(j), static_cast<int>(t))) continue;
                auto* ra = std::get_if<RotationAction>(&tr_[t]->actions[fi]);
                if (!ra) continue;
                std::uint64_t slope = 0;
                for (int d = 0; d < tf.dim; ++d)
                    slope += ra->coords[static_cast<std::size_t>(d)].step.times(k[static_cast<std::size_t>(d)]).raw;
                if (slope) tup.slopes.push_back({slope, static_cast<int>(j), static_cast<int>(t)});
            }
        }
        plan.tuples.push_back(std::move(tup));
    }

    std::unique_ptr<CatFactorPlan> build_cat_plan(std::size_t fi, const CatFactor& cf) {
        auto plan = std::make_unique<CatFactorPlan>();
        plan->q = cf.q;
        plan->period = cat_matrix_order(cf.q);
        for (auto* o : obs_) {
            auto* gt = std::get_if<GridTable>(&o->parts[fi]);
            if (!gt) throw std::invalid_argument("cat factor requires grid-table observables");
            if (gt->q != cf.q) throw std::invalid_argument("grid table order mismatch");
            plan->tables.push_back(gt);
        }
        plan->power.assign(obs_.size(), std::vector<std::int64_t>(tr_.size(), 0));
        for (std::size_t j = 0; j < obs_.size(); ++j)
            for (std::size_t t = 0; t < tr_.size(); ++t)
                plan->power[j][t] = std::get<CatAction>(tr_[t]->actions[fi]).power;
        return plan;
    }

    ArcFactorPlan build_arc_plan(std::size_t fi, const TorusFactor& tf) {
        ArcFactorPlan plan;
        plan.tf = &tf;
        for (auto* o : obs_) {
            auto* au = std::get_if<ArcUnion>(&o->parts[fi]);
            if (!au) throw std::invalid_argument("mixed observable kinds on an arc factor");
            if (static_cast<int>(au->coords.size()) != tf.dim)
                throw std::invalid_argument("arc union dimension mismatch");
            plan.unions.push_back(au);
        }
        plan.steps.assign(obs_.size(), {});
        for (std::size_t j = 0; j < obs_.size(); ++j) {
            plan.steps[j].assign(tr_.size(), std::vector<Fixed64>(static_cast<std::size_t>(tf.dim), Fixed64{0}));
            for (std::size_t t = 0; t < tr_.size(); ++t)
                if (auto* ra = std::get_if<RotationAction>(&tr_[t]->actions[fi]))
                    for (int d = 0; d < tf.dim; ++d)
                        plan.steps[j][t][static_cast<std::size_t>(d)] = ra->coords[static_cast<std::size_t>(d)].step;
        }
        return plan;
    }

    const System& sys_;
    ExponentTable exps_;
    std::vector<const Observable*> obs_;
    std::vector<const Transform*> tr_;
    std::vector<int> plan_kinds_;  // 0 torus-trig, 1 cat, 2 arc
    std::vector<TorusFactorPlan> torus_plans_;
    std::vector<std::unique_ptr<CatFactorPlan>> cat_plans_;
    std::vector<ArcFactorPlan> arc_plans_;
};

ExponentTable linear_exponents(std::size_t n_obs, std::size_t n_tr) {
    // observable j >= 1 is translated by transform j-1 to the power n
    ExponentTable e;
    e.n_obs = static_cast<int>(n_obs);
    e.n_tr = static_cast<int>(n_tr);
    e.polys.assign(n_obs, std::vector<std::vector<long long>>(n_tr));
    for (std::size_t j = 1; j < n_obs; ++j) e.polys[j][j - 1] = {0, 1};
    return e;
}

ExponentTable poly_exponents(std::size_t n_obs, std::size_t n_tr, std::span<const PolynomialMap> polys) {
    ExponentTable e;
    e.n_obs = static_cast<int>(n_obs);
    e.n_tr = static_cast<int>(n_tr);
    e.polys.assign(n_obs, std::vector<std::vector<long long>>(n_tr));
    for (std::size_t j = 1; j < n_obs; ++j)
        for (std::size_t t = 0; t < n_tr; ++t)
            e.polys[j][t] = polys[j - 1].coords[t];
    return e;
}

std::string provenance_string(std::size_t n_obs, std::span<const std::string> transforms, const char* kind) {
    std::ostringstream os;
    os << kind << " d=" << transforms.size() << " obs=" << n_obs << " transforms=";
    for (std::size_t i = 0; i < transforms.size(); ++i) os << (i ? "," : "") << transforms[i];
    return os.str();
}

CorrelationSeries run_series(const Evaluator& ev, long long n_min, long long n_max,
                             std::string provenance, double bound) {
    if (n_max < n_min) throw std::invalid_argument("series range needs n_max >= n_min");
    CorrelationSeries s;
    s.n_min = n_min;
    s.n_max = n_max;
    s.provenance = std::move(provenance);
    s.bound = bound;
    s.values.assign(static_cast<std::size_t>(n_max - n_min + 1), {0.0, 0.0});
    run_chunks(s.length(), 256, [&](std::size_t, std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i)
            s.values[static_cast<std::size_t>(i)] = ev.eval(n_min + i);
    });
    return s;
}

}  // namespace

// ------------------------------ public entry points --------------------------

std::complex<double> multicorrelation(const System& sys, std::span<const Observable> fs,
                                      std::span<const std::string> transforms, long long n) {
    if (fs.size() != transforms.size() + 1)
        throw std::invalid_argument("multicorrelation needs d+1 observables for d transforms");
    Evaluator ev(sys, fs, transforms, linear_exponents(fs.size(), transforms.size()));
    return ev.eval(n);
}

CorrelationSeries multicorrelation_series(const System& sys, std::span<const Observable> fs,
                                          std::span<const std::string> transforms,
                                          long long n_min, long long n_max) {
    if (fs.size() != transforms.size() + 1)
        throw std::invalid_argument("multicorrelation needs d+1 observables for d transforms");
    Evaluator ev(sys, fs, transforms, linear_exponents(fs.size(), transforms.size()));
    double bound = 1.0;
    for (auto& f : fs) bound *= f.bound;
    return run_series(ev, n_min, n_max, provenance_string(fs.size(), transforms, "multicorrelation"), bound);
}

namespace {
void validate_polys(std::span<const PolynomialMap> polys, std::size_t n_tr) {
    for (std::size_t j = 0; j < polys.size(); ++j) {
        if (polys[j].dim() != static_cast<int>(n_tr))
            throw std::invalid_argument("polynomial map dimension must equal transform count");
        for (auto& cs : polys[j].coords)
            if (cs.size() > 9)
                throw std::invalid_argument("polynomial exponents are capped at degree 8");
        if (!polys[j].nonconstant())
            throw std::invalid_argument("polynomial map p_" + std::to_string(j + 1) + " is constant");
        for (std::size_t l = 0; l < j; ++l)
            if (!PolynomialMap::difference_nonconstant(polys[j], polys[l]))
                throw std::invalid_argument("polynomial maps p_" + std::to_string(j + 1) + " and p_" +
                                            std::to_string(l + 1) + " differ by a constant");
    }
}
}  // namespace

std::complex<double> poly_multicorrelation(const System& sys, std::span<const Observable> fs,
                                           std::span<const std::string> transforms,
                                           std::span<const PolynomialMap> polys, long long n) {
    if (fs.size() != polys.size() + 1)
        throw std::invalid_argument("poly multicorrelation needs k+1 observables for k polynomial maps");
    validate_polys(polys, transforms.size());
    Evaluator ev(sys, fs, transforms, poly_exponents(fs.size(), transforms.size(), polys));
    return ev.eval(n);
}

CorrelationSeries poly_multicorrelation_series(const System& sys, std::span<const Observable> fs,
                                               std::span<const std::string> transforms,
                                               std::span<const PolynomialMap> polys,
                                               long long n_min, long long n_max) {
    if (fs.size() != polys.size() + 1)
        throw std::invalid_argument("poly multicorrelation needs k+1 observables for k polynomial maps");
    validate_polys(polys, transforms.size());
    Evaluator ev(sys, fs, transforms, poly_exponents(fs.size(), transforms.size(), polys));
    double bound = 1.0;
    for (auto& f : fs) bound *= f.bound;
    return run_series(ev, n_min, n_max, provenance_string(fs.size(), transforms, "poly-multicorrelation"), bound);
}

// ------------------------------ window averages ------------------------------

std::complex<double> cesaro(const CorrelationSeries& s, const AveragingWindow& w) {
    if (!s.contains(w)) throw std::out_of_range("averaging window escapes series range");
    NeumaierCSum sum;
    for (long long n = w.m; n < w.n; ++n) sum.add(s.at(n));
    return sum.value() / static_cast<double>(w.length());
}

BesicovitchReport besicovitch_estimate(const CorrelationSeries& s, std::span<const long long> lengths) {
    BesicovitchReport rep;
    const long long len = s.length();
    std::vector<long double> prefix(static_cast<std::size_t>(len) + 1, 0.0L);
    for (long long i = 0; i < len; ++i) {
        double a = std::abs(s.values[static_cast<std::size_t>(i)]);
        prefix[static_cast<std::size_t>(i + 1)] = prefix[static_cast<std::size_t>(i)] + static_cast<long double>(a) * a;
    }
    for (long long L : lengths) {
        if (L < 1 || L > len) throw std::invalid_argument("besicovitch window length exceeds series range");
        long double best = -1.0L;
        long long arg = 0;
        for (long long st = 0; st + L <= len; ++st) {
            long double v = prefix[static_cast<std::size_t>(st + L)] - prefix[static_cast<std::size_t>(st)];
            if (v > best) { best = v; arg = st; }
        }
        rep.entries.push_back({L, static_cast<double>(best / static_cast<long double>(L)), s.n_min + arg});
    }
    for (std::size_t i = 1; i < rep.entries.size(); ++i) {
        double prev = rep.entries[i - 1].sup_mean_sq;
        rep.ratios.push_back(prev > 0 ? rep.entries[i].sup_mean_sq / prev : 0.0);
    }
    return rep;
}

std::vector<long long> default_besicovitch_lengths(long long range_length) {
    std::vector<long long> out;
    for (long long L = 1 << 10; L <= (1 << 18); L <<= 1)
        if (L <= range_length) out.push_back(L);
    if (out.size() < 3) {
        out.clear();
        long long L = std::max<long long>(1, range_length / 4);
        out = {L, std::max<long long>(L + 1, range_length / 2), range_length};
    }
    return out;
}

NullVerdictReport null_verdict(const BesicovitchReport& rep, double decay_factor, double floor) {
    if (rep.entries.size() < 3)
        throw std::invalid_argument("null verdict needs at least 3 window lengths");
    NullVerdictReport out;
    out.decay_factor = decay_factor;
    out.floor = floor;

    bool decaying = true;
    for (std::size_t i = 1; i < rep.entries.size(); ++i) {
        double v = rep.entries[i].sup_mean_sq;
        double prev = rep.entries[i - 1].sup_mean_sq;
        if (!(v <= decay_factor * prev || v <= floor)) { decaying = false; break; }
    }
    if (decaying) {
        out.verdict = NullVerdict::NullConsistent;
        out.rationale = "each doubling decays by the factor or sits below the floor (finite-scale proxy)";
        return out;
    }
    // stabilization: last three values above floor and within 10% of each other
    std::size_t n = rep.entries.size();
    double a = rep.entries[n - 3].sup_mean_sq, b = rep.entries[n - 2].sup_mean_sq,
           c = rep.entries[n - 1].sup_mean_sq;
    double hi = std::max({a, b, c}), lo = std::min({a, b, c});
    if (lo > floor && hi <= lo * 1.1) {
        out.verdict = NullVerdict::NotNull;
        out.rationale = "sup window means stabilized above the floor within 10%";
    } else {
        out.verdict = NullVerdict::Inconclusive;
        out.rationale = "neither decay nor stabilization criteria met at these window lengths";
    }
    return out;
}

const char* to_string(NullVerdict v) {
    switch (v) {
        case NullVerdict::NullConsistent: return "null-consistent";
        case NullVerdict::NotNull: return "not-null";
        default: return "inconclusive";
    }
}

// ------------------------------ AverageFunction ------------------------------

double AverageFunction::l2_norm() const {
    long double s = 0.0L;
    for (auto& [k, c] : scalar_coeffs) s += static_cast<long double>(std::norm(c));
    for (auto& [k, g] : grid_coeffs) {
        long double cell = 0.0L;
        for (auto& z : g) cell += static_cast<long double>(std::norm(z));
        s += cell / static_cast<long double>(g.size());
    }
    return std::sqrt(static_cast<double>(s));
}

double AverageFunction::l2_distance(const AverageFunction& a, const AverageFunction& b) {
    if (a.torus_dim != b.torus_dim) throw std::invalid_argument("average function dimension mismatch");
    std::int64_t q = std::max(a.cat_q, b.cat_q);
    if (a.cat_q && b.cat_q && a.cat_q != b.cat_q)
        throw std::invalid_argument("average function grid mismatch");
    auto grid_of = [q](const AverageFunction& f, const std::vector<int>& k) {
        std::vector<std::complex<double>> g(static_cast<std::size_t>(q * q), {0.0, 0.0});
        auto it = f.grid_coeffs.find(k);
        if (it != f.grid_coeffs.end()) g = it->second;
        auto is = f.scalar_coeffs.find(k);
        if (is != f.scalar_coeffs.end())
            for (auto& z : g) z += is->second;
        return g;
    };
    std::vector<std::vector<int>> keys;
    for (auto& [k, c] : a.scalar_coeffs) keys.push_back(k);
    for (auto& [k, c] : b.scalar_coeffs) keys.push_back(k);
    for (auto& [k, c] : a.grid_coeffs) keys.push_back(k);
    for (auto& [k, c] : b.grid_coeffs) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    long double s = 0.0L;
    for (auto& k : keys) {
        if (q == 0) {
            std::complex<double> ca{0.0, 0.0}, cb{0.0, 0.0};
            if (auto it = a.scalar_coeffs.find(k); it != a.scalar_coeffs.end()) ca = it->second;
            if (auto it = b.scalar_coeffs.find(k); it != b.scalar_coeffs.end()) cb = it->second;
            s += static_cast<long double>(std::norm(ca - cb));
        } else {
            auto ga = grid_of(a, k), gb = grid_of(b, k);
            long double cell = 0.0L;
            for (std::size_t i = 0; i < ga.size(); ++i)
                cell += static_cast<long double>(std::norm(ga[i] - gb[i]));
            s += cell / static_cast<long double>(ga.size());
        }
    }
    return std::sqrt(static_cast<double>(s));
}

AverageFunction AverageFunction::from_trig_poly(const TrigPoly& p) {
    AverageFunction f;
    f.torus_dim = p.dim;
    for (auto& [k, c] : p.terms) f.scalar_coeffs[k] = c;
    return f;
}

AverageFunction accumulate_average(const System& sys, std::span<const Observable> fs,
                                   std::span<const std::string> transforms,
                                   const std::vector<std::vector<std::vector<long long>>>& exps,
                                   long long n_begin, long long n_end,
                                   const std::function<double(long long)>& weight) {
    if (n_end <= n_begin) throw std::invalid_argument("empty accumulation range");

    // factor layout guards: any number of torus factors, at most one cat factor
    int cat_count = 0;
    std::int64_t q = 0;
    for (auto& f : sys.factors)
        if (auto* cf = std::get_if<CatFactor>(&f)) { ++cat_count; q = cf->q; }
    if (cat_count > 1)
        throw std::invalid_argument("averaged functions support at most one cat factor");

    std::vector<const Transform*> tr;
    for (auto& t : transforms) tr.push_back(&sys.transform(t));

    const int m = sys.total_torus_dim();
    const std::size_t K = fs.size();

    // per-observable torus supports (concatenated coordinates) and cat tables
    struct Entry { std::vector<int> k; std::complex<double> c; };
    std::vector<std::vector<Entry>> supp(K);
    std::vector<const GridTable*> cat_tables(K, nullptr);
    for (std::size_t j = 0; j < K; ++j) {
        std::vector<std::vector<Entry>> per_factor;
        for (std::size_t fi = 0; fi < sys.factors.size(); ++fi) {
            if (std::holds_alternative<TorusFactor>(sys.factors[fi])) {
                auto* tp = std::get_if<TrigPoly>(&fs[j].parts[fi]);
                if (!tp) throw std::invalid_argument("averaged functions need trig-poly torus parts");
                std::vector<Entry> es;
                for (auto& [k, c] : tp->terms) es.push_back({k, c});
                per_factor.push_back(std::move(es));
            } else {
                auto* gt = std::get_if<GridTable>(&fs[j].parts[fi]);
                if (!gt) throw std::invalid_argument("cat factor requires grid-table observables");
                cat_tables[j] = gt;
            }
        }
        // combine per-factor supports into concatenated coordinates
        std::vector<Entry> acc = {{std::vector<int>{}, {1.0, 0.0}}};
        for (auto& es : per_factor) {
            std::vector<Entry> next;
            for (auto& a : acc)
                for (auto& e : es) {
                    Entry ne;
                    ne.k = a.k;
                    ne.k.insert(ne.k.end(), e.k.begin(), e.k.end());
                    ne.c = a.c * e.c;
                    next.push_back(std::move(ne));
                }
            acc = std::move(next);
        }
        supp[j] = std::move(acc);
        if (supp[j].empty()) supp[j].push_back({std::vector<int>(static_cast<std::size_t>(m), 0), {0.0, 0.0}});
    }

    // concatenated rotation steps per transform
    std::vector<std::vector<Fixed64>> steps(tr.size(), std::vector<Fixed64>(static_cast<std::size_t>(m), Fixed64{0}));
    std::vector<std::int64_t> cat_pow(tr.size(), 0);
    for (std::size_t t = 0; t < tr.size(); ++t) {
        int d = 0;
        for (std::size_t fi = 0; fi < sys.factors.size(); ++fi) {
            if (auto* ra = std::get_if<RotationAction>(&tr[t]->actions[fi]))
                for (auto& rc : ra->coords) steps[t][static_cast<std::size_t>(d++)] = rc.step;
            else
                cat_pow[t] = std::get<CatAction>(tr[t]->actions[fi]).power;
        }
    }

    // tuple list over all observables (no zero-sum constraint)
    struct Tup {
        std::complex<double> amp;
        std::vector<int> total;
        std::vector<SlopeTerm> slopes;
    };
    std::vector<Tup> tuples;
    {
        std::size_t combos = 1;
        for (auto& sj : supp) {
            combos *= sj.size();
            if (combos > kTupleBudget) throw std::runtime_error("average tuple budget exceeded");
        }
        std::vector<std::size_t> idx(K, 0);
        for (;;) {
            Tup tp;
            tp.amp = {1.0, 0.0};
            tp.total.assign(static_cast<std::size_t>(m), 0);
            for (std::size_t j = 0; j < K; ++j) {
                auto& e = supp[j][idx[j]];
                tp.amp *= e.c;
                for (int d = 0; d < m; ++d) tp.total[static_cast<std::size_t>(d)] += e.k[static_cast<std::size_t>(d)];
                if (j == 0) continue;
                for (std::size_t t = 0; t < tr.size(); ++t) {
                    bool zero = true;
                    for (auto cc : exps[j - 1][t]) if (cc) { zero = false; break; }
                    if (zero) continue;
                    std::uint64_t slope = 0;
                    for (int d = 0; d < m; ++d)
                        slope += steps[t][static_cast<std::size_t>(d)].times(e.k[static_cast<std::size_t>(d)]).raw;
                    if (slope) tp.slopes.push_back({slope, static_cast<int>(j), static_cast<int>(t)});
                }
            }
            if (tp.amp != std::complex<double>{0.0, 0.0}) tuples.push_back(std::move(tp));
            std::size_t j = 0;
            while (j < K && ++idx[j] == supp[j].size()) idx[j++] = 0;
            if (j == K) break;
        }
    }

    auto eval_poly = [&](std::size_t j, std::size_t t, long long n) -> long long {
        const auto& cs = exps[j - 1][t];
        __int128 acc = 0;
        for (auto it = cs.rbegin(); it != cs.rend(); ++it) acc = acc * n + *it;
        if (acc > INT64_MAX || acc < INT64_MIN) throw std::overflow_error("exponent overflow");
        return static_cast<long long>(acc);
    };

    const std::int64_t cat_period = q ? cat_matrix_order(q) : 1;

    const long long N = n_end - n_begin;
    const std::int64_t chunk = 1024;
    const std::int64_t nchunks = (N + chunk - 1) / chunk;
    std::vector<AverageFunction> partial(static_cast<std::size_t>(nchunks));

    run_chunks(N, chunk, [&](std::size_t c, std::int64_t b, std::int64_t e) {
        AverageFunction& out = partial[c];
        out.torus_dim = m;
        out.cat_q = q;
        for (std::int64_t i = b; i < e; ++i) {
            long long n = n_begin + i;
            double w = weight ? weight(n) : 1.0;
            if (w == 0.0) continue;
            // per-observable translated cat tables for this n, combined product
            std::vector<std::complex<double>> cat_prod;
            if (q) {
                cat_prod.assign(static_cast<std::size_t>(q * q), {1.0, 0.0});
                for (std::size_t j = 0; j < K; ++j) {
                    __int128 tot = 0;
                    if (j >= 1)
                        for (std::size_t t = 0; t < tr.size(); ++t)
                            if (cat_pow[t]) tot += static_cast<__int128>(eval_poly(j, t, n)) * cat_pow[t];
                    std::int64_t r = static_cast<std::int64_t>(((tot % cat_period) + cat_period) % cat_period);
                    CatMatrix M = cat_power(q, r);
                    for (std::int64_t a = 0; a < q; ++a)
                        for (std::int64_t bb = 0; bb < q; ++bb) {
                            GridPoint img = cat_apply(q, M, GridPoint{a, bb});
                            cat_prod[static_cast<std::size_t>(a * q + bb)] *=
                                cat_tables[j]->v[static_cast<std::size_t>(img.i * q + img.j)];
                        }
                }
            }
            for (auto& tp : tuples) {
                std::uint64_t angle = 0;
                for (auto& sl : tp.slopes)
                    angle += sl.slope *
                             static_cast<std::uint64_t>(eval_poly(static_cast<std::size_t>(sl.j),
                                                                  static_cast<std::size_t>(sl.t), n));
                std::complex<double> z = tp.amp * w;
                if (angle) z *= unit_phase(Fixed64{angle});
                if (q) {
                    auto& g = out.grid_coeffs[tp.total];
                    if (g.empty()) g.assign(static_cast<std::size_t>(q * q), {0.0, 0.0});
                    for (std::size_t ci = 0; ci < g.size(); ++ci) g[ci] += z * cat_prod[ci];
                } else {
                    out.scalar_coeffs[tp.total] += z;
                }
            }
        }
    });

    AverageFunction out;
    out.torus_dim = m;
    out.cat_q = q;
    for (auto& p : partial) {
        for (auto& [k, c] : p.scalar_coeffs) out.scalar_coeffs[k] += c;
        for (auto& [k, g] : p.grid_coeffs) {
            auto& dst = out.grid_coeffs[k];
            if (dst.empty()) dst.assign(g.size(), {0.0, 0.0});
            for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
        }
    }
    double inv = 1.0 / static_cast<double>(N);
    for (auto& [k, c] : out.scalar_coeffs) c *= inv;
    for (auto& [k, g] : out.grid_coeffs)
        for (auto& z : g) z *= inv;
    return out;
}

AverageFunction accumulate_linear_average(const System& sys, std::span<const Observable> fs,
                                          std::span<const std::string> transforms,
                                          long long n_begin, long long n_end,
                                          const std::function<double(long long)>& weight) {
    // every observable j>=1 is moved by transform j-1 to the power n
    std::vector<std::vector<std::vector<long long>>> exps(
        fs.size() - 1, std::vector<std::vector<long long>>(transforms.size()));
    for (std::size_t j = 1; j < fs.size(); ++j) exps[j - 1][j - 1] = {0, 1};
    return accumulate_average(sys, fs, transforms, exps, n_begin, n_end, weight);
}

CorrelationSeries character_series(const Irrational& theta, long long n_min, long long n_max) {
    CorrelationSeries s;
    s.n_min = n_min;
    s.n_max = n_max;
    s.bound = 1.0;
    s.provenance = "character theta=" + theta.token();
    s.values.resize(static_cast<std::size_t>(n_max - n_min + 1));
    Fixed64 a = theta.fixed();
    run_chunks(s.length(), 8192, [&](std::size_t, std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i)
            s.values[static_cast<std::size_t>(i)] = unit_phase(a.times(n_min + i));
    });
    return s;
}

}  // namespace ergo
