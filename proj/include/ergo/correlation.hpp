// correlation.hpp — multicorrelation sequences and window averaging.
//
// Limits are replaced throughout by finite windows with explicit diagnostics;
// no operation claims a true limit. The nullsequence proxy at length L is the
// supremum over all placements [M, M+L) of the windowed mean of |a|^2.

#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ergo/systems.hpp"

namespace ergo {

// ------------------------------ domain types ---------------------------------

struct AveragingWindow {
    long long m{0}, n{0};  // [m, n), n > m
    AveragingWindow(long long m_, long long n_) : m(m_), n(n_) {
        if (n <= m) throw std::invalid_argument("averaging window needs n > m");
    }
    long long length() const { return n - m; }
};

struct CorrelationSeries {
    long long n_min{0}, n_max{0};  // inclusive range
    std::vector<std::complex<double>> values;
    std::string provenance;
    double bound{1.0};

    long long length() const { return n_max - n_min + 1; }
    std::complex<double> at(long long n) const { return values[static_cast<std::size_t>(n - n_min)]; }
    std::complex<double>& at(long long n) { return values[static_cast<std::size_t>(n - n_min)]; }
    bool contains(const AveragingWindow& w) const { return w.m >= n_min && w.n <= n_max + 1; }
};

// integer polynomial map Z -> Z^d, exact evaluation with overflow checks
struct PolynomialMap {
    std::vector<std::vector<long long>> coords;  // per output coordinate, ascending-degree coefficients

    static PolynomialMap linear_in(int d, int coord);  // n -> n * e_coord
    int dim() const { return static_cast<int>(coords.size()); }
    long long eval_coord(int c, long long n) const;
    bool coord_nonconstant(int c) const;
    bool nonconstant() const;
    static bool difference_nonconstant(const PolynomialMap& a, const PolynomialMap& b);
};

// ------------------------------ multicorrelation -----------------------------

// integral of f0 * T1^n f1 * ... * Td^n fd
std::complex<double> multicorrelation(const System& sys, std::span<const Observable> fs,
                                      std::span<const std::string> transforms, long long n);

CorrelationSeries multicorrelation_series(const System& sys, std::span<const Observable> fs,
                                          std::span<const std::string> transforms,
                                          long long n_min, long long n_max);

// integral of f0 * prod_j (prod_i Ti^{p_{j,i}(n)}) fj
std::complex<double> poly_multicorrelation(const System& sys, std::span<const Observable> fs,
                                           std::span<const std::string> transforms,
                                           std::span<const PolynomialMap> polys, long long n);

CorrelationSeries poly_multicorrelation_series(const System& sys, std::span<const Observable> fs,
                                               std::span<const std::string> transforms,
                                               std::span<const PolynomialMap> polys,
                                               long long n_min, long long n_max);

// ------------------------------ averages -------------------------------------

std::complex<double> cesaro(const CorrelationSeries& s, const AveragingWindow& w);

struct BesicovitchReport {
    struct Entry {
        long long length;
        double sup_mean_sq;
        long long arg_placement;  // window start achieving the sup
    };
    std::vector<Entry> entries;
    std::vector<double> ratios;  // successive value ratios (diagnostic)
};

BesicovitchReport besicovitch_estimate(const CorrelationSeries& s, std::span<const long long> lengths);

// default doubling schedule 2^10 .. 2^18, clipped to the series range
std::vector<long long> default_besicovitch_lengths(long long range_length);

enum class NullVerdict { NullConsistent, NotNull, Inconclusive };

struct NullVerdictReport {
    NullVerdict verdict{NullVerdict::Inconclusive};
    double decay_factor;
    double floor;
    std::string rationale;  // finite-scale proxy; calibration is heuristic
};

NullVerdictReport null_verdict(const BesicovitchReport& rep, double decay_factor = 0.75,
                               double floor = 1e-4);

const char* to_string(NullVerdict v);

// ------------------------------ averaged functions ---------------------------

// (1/N) sum_n w(n) * prod_i Ti^{E_i(n)} f_i  held exactly as a function:
// torus frequencies with scalar coefficients, or (with a single cat factor)
// grid-table coefficients per torus frequency. Supports L2 norms/distances
// via Parseval and grid means.
class AverageFunction {
public:
    int torus_dim{0};
    std::int64_t cat_q{0};  // 0: no cat factor
    std::map<std::vector<int>, std::complex<double>> scalar_coeffs;
    std::map<std::vector<int>, std::vector<std::complex<double>>> grid_coeffs;

    double l2_norm() const;
    static double l2_distance(const AverageFunction& a, const AverageFunction& b);
    static AverageFunction from_trig_poly(const TrigPoly& p);
};

// per-observable exponent polynomials: exps[j][t] is the integer polynomial in
// n applied as transform t's power on observable j+1 (f0 is never translated).
AverageFunction accumulate_average(const System& sys, std::span<const Observable> fs,
                                   std::span<const std::string> transforms,
                                   const std::vector<std::vector<std::vector<long long>>>& exps,
                                   long long n_begin, long long n_end,
                                   const std::function<double(long long)>& weight = {});

// convenience over the linear model: term_n = prod_i Ti^n f_i (all observables translated)
AverageFunction accumulate_linear_average(const System& sys, std::span<const Observable> fs,
                                          std::span<const std::string> transforms,
                                          long long n_begin, long long n_end,
                                          const std::function<double(long long)>& weight = {});

// helper: synthesize a character series a(n) = e(2 pi i n theta) on [0, n_max]
CorrelationSeries character_series(const Irrational& theta, long long n_min, long long n_max);

}  // namespace ergo
