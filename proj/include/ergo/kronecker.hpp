// kronecker.hpp — rotation-factor limit formula, orbit closures, and the
// structured + residual split of multicorrelation sequences on systems whose
// rotation factor is explicit by construction.
//
// The closure Y of {(n a, n b)} is declared through integer relation rows,
// never inferred; a character e((k,l).(u,v)) integrates to 1 over Y exactly
// when (k,l) lies in the integer row span of the relation matrix.

#pragma once

#include <vector>

#include "ergo/correlation.hpp"
#include "ergo/systems.hpp"

namespace ergo {

struct KroneckerFactor {
    int m{0};                    // total rotation dimension
    std::vector<Fixed64> alpha;  // image of the first transform
    std::vector<Fixed64> beta;   // image of the second transform
    std::string label_t, label_s;
};

KroneckerFactor kronecker_factor(const System& sys, const std::string& t, const std::string& s);

// conditional expectation onto the rotation factor: torus parts pass through,
// grid parts collapse to their mean
TrigPoly project_to_factor(const System& sys, const Observable& f);

struct OrbitClosure {
    std::vector<std::vector<long long>> relations;     // r x 2m integer rows
    std::vector<double> residuals;                     // |K (alpha,beta) - round| per row
    std::vector<std::vector<long long>> kernel_basis;  // integer spanning set of the connected direction
    std::vector<std::vector<long long>> hermite;       // row-reduced relation lattice
};

// validates each relation row against (alpha, beta) to 1e-8 and rejects on failure
OrbitClosure orbit_closure(const KroneckerFactor& z, const std::vector<std::vector<long long>>& relations);

// is (k,l) in the integer row span of the relation matrix?
bool annihilates(const OrbitClosure& y, const std::vector<long long>& freq);

// integral over Y of f1(z+u) f2(z+v) as a trig poly in z (exact)
TrigPoly limit_rhs(const KroneckerFactor& z, const TrigPoly& f1, const TrigPoly& f2,
                   const OrbitClosure& y);

struct AverageVsLimitReport {
    AverageFunction finite_average;
    TrigPoly limit;
    double l2_distance{0.0};
    AuditReport audit;
};

// pre: ergodicity audit for T, S, TS^-1 must pass (throws otherwise)
AverageVsLimitReport average_vs_limit(const System& sys, const Observable& f1, const Observable& f2,
                                      const KroneckerFactor& z, const OrbitClosure& y, long long n_avg);

struct WeightedAverageReport {
    std::complex<double> finite_value{0.0, 0.0};
    std::complex<double> limit_value{0.0, 0.0};
    double gap{0.0};
    AuditReport audit;
};

// eta is a trig poly in (u, v) on Z^2 restricted to Y (dimension 2m)
WeightedAverageReport weighted_average(const System& sys, const TrigPoly& eta, const Observable& f0,
                                       const Observable& f1, const Observable& f2,
                                       const KroneckerFactor& z, const OrbitClosure& y, long long n_avg);

struct Decomposition {
    CorrelationSeries a;     // full multicorrelation
    CorrelationSeries a_st;  // rotation-factor structured part, exact trig arithmetic
    CorrelationSeries a_er;  // a - a_st
    BesicovitchReport besicovitch;
    NullVerdictReport verdict;
};

Decomposition decompose(const System& sys, const Observable& f0, const Observable& f1,
                        const Observable& f2, const KroneckerFactor& z, long long n_min, long long n_max);

}  // namespace ergo
