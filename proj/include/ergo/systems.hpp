// systems.hpp — explicit measure-preserving systems at desk scale.
//
// Three factor families, freely combinable into products:
//   * rotation tori: coordinates are Fixed64 points, transforms translate by
//     token-declared amounts; all orbit arithmetic is exact mod-1 arithmetic;
//   * cat-map grids: the invariant rational lattice (1/q)Z^2 under
//     ((2,1),(1,1)), iterated in integer arithmetic mod q — exact and
//     periodic, mixing-like below the matrix period;
//   * observables: trigonometric polynomials, products of per-coordinate arc
//     unions, and grid tables, with exact translation/product/integration.

#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ergo/fixed64.hpp"

namespace ergo {

// ------------------------------ factors -------------------------------------

struct TorusFactor { int dim{1}; };
struct CatFactor { std::int64_t q{0}; };
using Factor = std::variant<TorusFactor, CatFactor>;

// One rotation coordinate of a transform: exact fixed-point step plus the
// symbolic value used by hypothesis audits.
struct RotCoord {
    Fixed64 step{};
    QuadExpr sym{};
    std::string spelling;

    static RotCoord from_token(const Irrational& ir) {
        return RotCoord{ir.fixed(), ir.sym(), ir.token()};
    }
};

struct RotationAction { std::vector<RotCoord> coords; };
struct CatAction { std::int64_t power{0}; };  // applies M^(power*n) under T^n
using FactorAction = std::variant<RotationAction, CatAction>;

struct Transform {
    std::string label;
    std::vector<FactorAction> actions;  // one per factor
};

struct System {
    std::vector<Factor> factors;
    std::vector<Transform> transforms;

    const Transform& transform(const std::string& label) const;
    int transform_index(const std::string& label) const;
    int total_torus_dim() const;
    bool has_cat_factor() const;

    // builders
    static System torus(int dim);
    static System cat_grid(std::int64_t q);
    System& add_transform(const std::string& label, const std::vector<Irrational>& alphas,
                          const std::vector<std::int64_t>& cat_powers = {});
};

// ------------------------------ phase points ---------------------------------

struct TorusPoint { std::vector<Fixed64> x; };
struct GridPoint { std::int64_t i{0}, j{0}; };
using FactorPoint = std::variant<TorusPoint, GridPoint>;

struct PhasePoint {
    std::vector<FactorPoint> parts;
};

PhasePoint make_torus_point(const System& sys, const std::vector<double>& coords);

// ------------------------------ observables ----------------------------------

struct TrigPoly {
    int dim{1};
    std::map<std::vector<int>, std::complex<double>> terms;

    static TrigPoly constant(int dim, std::complex<double> c);
    static TrigPoly character(int dim, const std::vector<int>& freq, std::complex<double> coeff = 1.0);

    std::complex<double> coeff(const std::vector<int>& k) const {
        auto it = terms.find(k);
        return it == terms.end() ? std::complex<double>{0.0, 0.0} : it->second;
    }
    double coeff_l1() const;
    TrigPoly conjugate() const;
    void prune(double eps = 0.0);
};

// Half-open arcs on the circle, kept as exact [lo, hi) sub-intervals of
// [0, 2^64] in 128-bit integers so sweeps and measures are exact.
struct ArcUnion {
    using U128 = unsigned __int128;
    static constexpr U128 kTurn = static_cast<U128>(1) << 64;
    struct Arc { U128 lo, hi; };

    std::vector<std::vector<Arc>> coords;  // per torus coordinate; sorted, disjoint

    static ArcUnion from_endpoints(const std::vector<std::vector<std::pair<double, double>>>& eps);
    static ArcUnion full_circle(int dim);
    double measure() const;
    U128 coord_length(int c) const;
};

struct GridTable {
    std::int64_t q{0};
    std::vector<std::complex<double>> v;  // q*q row-major; index i*q+j holds value at (i/q, j/q)

    static GridTable constant(std::int64_t q, std::complex<double> c);
    // exp(2 pi i (k1*i + k2*j) / q)
    static GridTable character(std::int64_t q, long long k1, long long k2);
    // character(k) - character(M^T k): mean-zero with zero orbit averages
    static GridTable coboundary(std::int64_t q, long long k1, long long k2);
    std::complex<double> mean() const;
    double max_abs() const;
};

using FactorObservable = std::variant<TrigPoly, ArcUnion, GridTable>;

struct Observable {
    std::vector<FactorObservable> parts;  // one per system factor
    double bound{0.0};

    static Observable single(FactorObservable part, double bound_hint = -1.0);
    static Observable tensor(std::vector<FactorObservable> parts, double bound_hint = -1.0);
    static double default_bound(const FactorObservable& p);
    Observable conjugate() const;
};

// ------------------------------ cat-map core ---------------------------------

struct CatMatrix {
    // entries mod q, row-major
    std::int64_t a{2}, b{1}, c{1}, d{1};
};
CatMatrix cat_power(std::int64_t q, long long n);
std::int64_t cat_matrix_order(std::int64_t q);  // order of ((2,1),(1,1)) in GL2(Z/q)
GridPoint cat_apply(std::int64_t q, const CatMatrix& m, GridPoint p);

// ------------------------------ operations -----------------------------------

PhasePoint apply(const System& sys, const std::string& label, long long n, const PhasePoint& p);
std::complex<double> integrate(const System& sys, const Observable& f);
Observable constant_observable(const System& sys, std::complex<double> c);
Observable pointwise_product(const Observable& f, const Observable& g);
Observable translate(const System& sys, const Observable& f, const std::string& label, long long n);
std::complex<double> eval(const System& sys, const Observable& f, const PhasePoint& p);

// ------------------------------ ergodicity audit -----------------------------

struct ErgodicityClaim {
    std::vector<std::pair<std::string, long long>> combo;  // transform label -> exponent
    bool expect_ergodic{true};
};

enum class AuditVerdict { Pass, Fail, Inconclusive };

struct AuditEntry {
    std::string combo_spelling;
    AuditVerdict verdict{AuditVerdict::Inconclusive};
    std::string method;    // "symbolic" or "numeric(K=...,tol=...)"
    bool matches_expected{false};
    bool heuristic{false};  // numeric route, or cat components present
    double numeric_min_dist{-1.0};
    std::string note;
};

struct AuditReport {
    std::vector<AuditEntry> entries;
    bool all_match() const {
        for (auto& e : entries)
            if (!e.matches_expected) return false;
        return true;
    }
};

struct AuditOptions {
    long long numeric_k{10000};
    double numeric_tol{1e-6};
};

AuditReport ergodicity_audit(const System& sys, const std::vector<ErgodicityClaim>& claims,
                             const AuditOptions& opt = {});

// convenience: audit that a single integer combination acts ergodically
AuditEntry audit_combo(const System& sys, const std::vector<std::pair<std::string, long long>>& combo,
                       const AuditOptions& opt = {});

}  // namespace ergo
