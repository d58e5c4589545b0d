#include "ergo/seminorms.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "ergo/parallel.hpp"

namespace ergo {

namespace {

// base-level integrals: avg_{n<N} integral(conj g * T^n g), factorized per
// factor with closed-form torus phases and a residue cache on cat factors
class BaseLevel {
public:
    BaseLevel(const System& sys, const Observable& g, const Transform& t) : sys_(sys) {
        for (std::size_t fi = 0; fi < sys.factors.size(); ++fi) {
            if (std::holds_alternative<TorusFactor>(sys.factors[fi])) {
                if (auto* tp = std::get_if<TrigPoly>(&g.parts[fi])) {
                    auto* ra = std::get_if<RotationAction>(&t.actions[fi]);
                    TorusPart part;
                    for (auto& [k, c] : tp->terms) {
                        std::uint64_t slope = 0;
                        for (std::size_t d = 0; d < k.size(); ++d)
                            slope += ra->coords[d].step.times(k[d]).raw;
                        part.terms.push_back({std::norm(c), slope});
                    }
                    torus_.push_back(std::move(part));
                } else {
                    throw std::invalid_argument("box seminorm expects trig-poly or grid observables");
                }
            } else {
                auto* gt = std::get_if<GridTable>(&g.parts[fi]);
                if (!gt) throw std::invalid_argument("cat factor requires a grid-table observable");
                CatPart part;
                part.q = gt->q;
                part.period = cat_matrix_order(gt->q);
                part.power = std::get<CatAction>(t.actions[fi]).power;
                part.table = gt;
                cat_.push_back(std::move(part));
            }
        }
    }

    std::complex<double> integral_at(long long n) const {
        std::complex<double> acc{1.0, 0.0};
        for (auto& part : torus_) {
            std::complex<double> s{0.0, 0.0};
            for (auto& [w, slope] : part.terms)
                s += slope == 0 ? std::complex<double>{w, 0.0}
                                : w * unit_phase(Fixed64{slope * static_cast<std::uint64_t>(n)});
            acc *= s;
        }
        for (auto& part : cat_) acc *= part.integral(n);
        return acc;
    }

private:
    struct TorusPart {
        std::vector<std::pair<double, std::uint64_t>> terms;  // |coeff|^2, k . step
    };
    // used by a single worker; the residue cache needs no locking
    struct CatPart {
        std::int64_t q{0};
        std::int64_t period{1};
        std::int64_t power{0};
        const GridTable* table{nullptr};
        mutable std::map<std::int64_t, std::complex<double>> cache;

        std::complex<double> integral(long long n) const {
            __int128 e = static_cast<__int128>(n) * power;
            std::int64_t r = static_cast<std::int64_t>(((e % period) + period) % period);
            auto it = cache.find(r);
            if (it != cache.end()) return it->second;
            CatMatrix m = cat_power(q, r);
            NeumaierCSum s;
            for (std::int64_t i = 0; i < q; ++i)
                for (std::int64_t j = 0; j < q; ++j) {
                    GridPoint img = cat_apply(q, m, GridPoint{i, j});
                    s.add(std::conj(table->v[static_cast<std::size_t>(i * q + j)]) *
                          table->v[static_cast<std::size_t>(img.i * q + img.j)]);
                }
            auto val = s.value() / static_cast<double>(q * q);
            cache.emplace(r, val);
            return val;
        }
    };

    const System& sys_;
    std::vector<TorusPart> torus_;
    std::vector<CatPart> cat_;
};

struct LevelState {
    const System* sys;
    const std::vector<std::string>* transforms;
    const std::vector<long long>* lengths;
    double clip{0.0};
};

// returns the estimate of |||g|||^(2^level)
double level_power(LevelState& st, int level, const Observable& g) {
    const Transform& t = st.sys->transform((*st.transforms)[static_cast<std::size_t>(level - 1)]);
    const long long N = (*st.lengths)[static_cast<std::size_t>(level - 1)];
    if (level == 1) {
        BaseLevel base(*st.sys, g, t);
        NeumaierSum s;
        for (long long n = 0; n < N; ++n) s.add(base.integral_at(n).real());
        double v = s.value() / static_cast<double>(N);
        if (v < 0) {
            st.clip = std::max(st.clip, -v);
            v = 0.0;
        }
        return v;
    }
    const Observable gbar = g.conjugate();
    NeumaierSum s;
    for (long long n = 0; n < N; ++n) {
        Observable gn = pointwise_product(translate(*st.sys, g, t.label, n), gbar);
        s.add(level_power(st, level - 1, gn));
    }
    return std::max(s.value() / static_cast<double>(N), 0.0);
}

// top-level split so the outermost interval runs on the worker pool
double level_power_parallel(LevelState& st, int level, const Observable& g, double* clip_out) {
    const long long N = (*st.lengths)[static_cast<std::size_t>(level - 1)];
    if (level == 1) {
        double v = level_power(st, 1, g);
        *clip_out = st.clip;
        return v;
    }
    const Transform& t = st.sys->transform((*st.transforms)[static_cast<std::size_t>(level - 1)]);
    const Observable gbar = g.conjugate();
    const std::int64_t chunk = 64;
    const std::int64_t nchunks = (N + chunk - 1) / chunk;
    std::vector<double> sums(static_cast<std::size_t>(nchunks), 0.0);
    std::vector<double> clips(static_cast<std::size_t>(nchunks), 0.0);
    run_chunks(N, chunk, [&](std::size_t c, std::int64_t b, std::int64_t e) {
        LevelState local = st;
        local.clip = 0.0;
        NeumaierSum s;
        for (std::int64_t n = b; n < e; ++n) {
            Observable gn = pointwise_product(translate(*st.sys, g, t.label, n), gbar);
            s.add(level_power(local, level - 1, gn));
        }
        sums[c] = s.value();
        clips[c] = local.clip;
    });
    NeumaierSum total;
    for (auto v : sums) total.add(v);
    for (auto c : clips) *clip_out = std::max(*clip_out, c);
    return std::max(total.value() / static_cast<double>(N), 0.0);
}

double run_schedule(const System& sys, const Observable& f, const std::vector<std::string>& transforms,
                    const std::vector<long long>& lengths, double* clip_out) {
    LevelState st{&sys, &transforms, &lengths, 0.0};
    int d = static_cast<int>(transforms.size());
    double clip = 0.0;
    double p = level_power_parallel(st, d, f, &clip);
    *clip_out = std::max(*clip_out, clip);
    return std::pow(p, 1.0 / static_cast<double>(1LL << d));
}

}  // namespace

SeminormEstimate box_seminorm(const System& sys, const Observable& f,
                              std::vector<std::string> transforms, const WindowSchedule& schedule) {
    const int d = static_cast<int>(transforms.size());
    if (d < 1 || d > 3) throw std::invalid_argument("box seminorm supports 1 <= d <= 3 transforms");
    if (schedule.depth() != d) throw std::invalid_argument("schedule depth must match the transform multiset");
    for (auto l : schedule.lengths)
        if (l < 64) throw std::invalid_argument("schedule lengths must be >= 64");

    SeminormEstimate est;
    est.schedule = schedule;
    est.transforms = transforms;
    est.value = run_schedule(sys, f, transforms, schedule.lengths, &est.clip_magnitude);
    est.doubled_value = run_schedule(sys, f, transforms, schedule.doubled().lengths, &est.clip_magnitude);
    est.diagnostic = std::abs(est.value - est.doubled_value) / std::max(est.value, 1e-6);
    return est;
}

PermutationCheckReport permutation_check(const System& sys, const Observable& f,
                                         std::vector<std::string> transforms,
                                         const WindowSchedule& schedule) {
    const int d = static_cast<int>(transforms.size());
    if (d < 2 || d > 3) throw std::invalid_argument("permutation check supports d = 2 or 3");
    PermutationCheckReport rep;
    std::sort(transforms.begin(), transforms.end());
    do {
        rep.orders.push_back(transforms);
        rep.estimates.push_back(box_seminorm(sys, f, transforms, schedule));
    } while (std::next_permutation(transforms.begin(), transforms.end()));
    double lo = rep.estimates[0].value, hi = rep.estimates[0].value;
    for (auto& e : rep.estimates) {
        lo = std::min(lo, e.value);
        hi = std::max(hi, e.value);
    }
    rep.max_relative_difference = (hi - lo) / std::max(hi, 1e-6);
    return rep;
}

CollapseCheckReport ergodic_collapse_check(const System& sys, const Observable& f,
                                           std::vector<std::string> transforms,
                                           const WindowSchedule& schedule) {
    CollapseCheckReport rep;
    std::vector<ErgodicityClaim> claims;
    for (auto& t : transforms) claims.push_back({{{t, 1}}, true});
    rep.audit = ergodicity_audit(sys, claims);
    for (auto& e : rep.audit.entries)
        if (e.verdict != AuditVerdict::Pass) {
            rep.refused = true;
            return rep;  // hypothesis violated: report, do not compute
        }
    rep.mixed = box_seminorm(sys, f, transforms, schedule);
    for (auto& t : transforms) {
        std::vector<std::string> uniform(transforms.size(), t);
        rep.collapsed.push_back(box_seminorm(sys, f, uniform, schedule));
        double a = rep.mixed.value, b = rep.collapsed.back().value;
        rep.relative_differences.push_back(std::abs(a - b) / std::max({a, b, 1e-6}));
    }
    return rep;
}

AverageBoundReport average_bound_check(const System& sys, std::span<const Observable> fs,
                                       std::vector<std::string> transforms,
                                       const WindowSchedule& schedule, long long n_range) {
    const std::size_t d = fs.size();
    if (d < 1 || d != transforms.size())
        throw std::invalid_argument("average bound check needs one observable per transform");
    for (std::size_t i = 1; i < d; ++i)
        if (fs[i].bound > 1.0 + 1e-12)
            throw std::invalid_argument("average bound check requires sup-norm <= 1 for f_2..f_d");

    // finite average (1/N) sum_n prod_i S_i^n f_i, held exactly
    std::vector<Observable> with_f0;
    with_f0.push_back(constant_observable(sys, {1.0, 0.0}));
    for (auto& f : fs) with_f0.push_back(f);
    AverageFunction avg =
        accumulate_linear_average(sys, with_f0, transforms, 0, n_range);

    AverageBoundReport rep;
    rep.average_l2 = avg.l2_norm();

    // derived transforms: T_1 = S_1, T_i = S_1 S_i^{-1}
    System derived = sys;
    std::vector<std::string> labels;
    const Transform& s1 = sys.transform(transforms[0]);
    for (std::size_t i = 0; i < d; ++i) {
        const Transform& si = sys.transform(transforms[i]);
        Transform t;
        t.label = "derived_" + std::to_string(i);
        for (std::size_t fi = 0; fi < sys.factors.size(); ++fi) {
            if (auto* r1 = std::get_if<RotationAction>(&s1.actions[fi])) {
                auto* ri = std::get_if<RotationAction>(&si.actions[fi]);
                RotationAction ra;
                for (std::size_t c = 0; c < r1->coords.size(); ++c) {
                    RotCoord rc;
                    if (i == 0) {
                        rc = r1->coords[c];
                    } else {
                        rc.step = r1->coords[c].step - ri->coords[c].step;
                        rc.sym = r1->coords[c].sym;
                        rc.sym += ri->coords[c].sym.scaled(-1);
                        rc.spelling = r1->coords[c].spelling + "-" + ri->coords[c].spelling;
                    }
                    ra.coords.push_back(std::move(rc));
                }
                t.actions.emplace_back(std::move(ra));
            } else {
                auto p1 = std::get<CatAction>(s1.actions[fi]).power;
                auto pi = std::get<CatAction>(si.actions[fi]).power;
                t.actions.emplace_back(CatAction{i == 0 ? p1 : p1 - pi});
            }
        }
        labels.push_back(t.label);
        derived.transforms.push_back(std::move(t));
    }

    rep.bound_estimate = box_seminorm(derived, fs[0], labels, schedule);
    rep.seminorm_bound = rep.bound_estimate.value;
    rep.slack = rep.seminorm_bound - rep.average_l2;
    return rep;
}

}  // namespace ergo
