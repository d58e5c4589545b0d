// heisenberg.hpp — the 2-step nilmanifold engine on the upper-triangular
// Heisenberg group: (x,y,z).(x',y',z') = (x+x', y+y', z+z'+x y'), with the
// integer lattice as the cocompact subgroup. Powers are closed-form, so
// orbits at n ~ 10^6 cost O(1) per point.

#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace ergo {

struct HeisenbergElement {
    double x{0.0}, y{0.0}, z{0.0};
};

HeisenbergElement nil_mul(const HeisenbergElement& g, const HeisenbergElement& h);
HeisenbergElement nil_inv(const HeisenbergElement& g);
HeisenbergElement nil_commutator(const HeisenbergElement& g, const HeisenbergElement& h);
// (n x, n y, n z + C(n,2) x y) — valid for every integer n
HeisenbergElement nil_pow(const HeisenbergElement& g, long long n);

struct ReduceResult {
    HeisenbergElement rep;  // all coordinates in [0,1)
    long long a{0}, b{0}, c{0};  // the lattice element used, for audit
};

// right-multiplies by the lattice element gamma = (a, b, c) with
// b = -floor(y), a = -floor(x), c = -floor(z + x b)
ReduceResult reduce(const HeisenbergElement& g);

// Gamma-invariant observables: trig polys in the (x, y) factor torus are
// continuous on the quotient; reduced-coordinate tables may jump across the
// fundamental-domain boundary and are labeled as such in reports.
struct NilObservable {
    enum class Kind { FactorTorusTrigPoly, ReducedTable } kind{Kind::FactorTorusTrigPoly};
    // trig poly: frequency pairs (j,k) with coefficients
    std::vector<std::pair<std::pair<int, int>, std::complex<double>>> terms;
    // reduced table: g^3 cells over [0,1)^3, nearest-cell lookup
    int grid{0};
    std::vector<std::complex<double>> table;

    static NilObservable character(int j, int k, std::complex<double> c = {1.0, 0.0});
    std::complex<double> eval_reduced(const HeisenbergElement& rep) const;
    bool continuous() const { return kind == Kind::FactorTorusTrigPoly; }
};

// f(reduce(a^n x0))
std::complex<double> nilsequence(const NilObservable& f, const HeisenbergElement& a,
                                 const HeisenbergElement& x0, long long n);

struct WeylEntry {
    int j{0}, k{0};
    std::complex<double> sum{0.0, 0.0};
};

struct EquidistributionReport {
    std::vector<WeylEntry> weyl;       // (1/N) sum e(2 pi i (j x_n + k y_n)), (j,k) != 0
    double chi_square{0.0};            // 16^3-bin histogram statistic of the reduced orbit
    long long bins{0}, samples{0};
    double max_weyl_modulus{0.0};
};

EquidistributionReport equidistribution_report(const HeisenbergElement& a, const HeisenbergElement& x0,
                                               long long n_samples, int max_j, int max_k);

}  // namespace ergo
