// gowers.hpp — uniformity norms on Z/NZ.
//
// Both the recursive and the unrolled parallelepiped forms are provided; the
// parallelepiped form is the oracle for the recursion. All big sums run
// through the order-independent fixed-point accumulator, so permuted inputs
// (translations, modulations) produce bit-identical sums and the results do
// not depend on the worker count.

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "ergo/parallel.hpp"

namespace ergo {

struct CyclicFunction {
    long long N{0};
    std::vector<std::complex<double>> v;
    double bound{1.0};

    static CyclicFunction from_values(std::vector<std::complex<double>> vals);
    static CyclicFunction delta(long long N);     // indicator of {0}
    static CyclicFunction character(long long N, long long k);
    static CyclicFunction constant(long long N, std::complex<double> c);

    std::complex<double> at(long long n) const {
        long long r = n % N;
        if (r < 0) r += N;
        return v[static_cast<std::size_t>(r)];
    }
    CyclicFunction shifted(long long h) const;
    CyclicFunction scaled(std::complex<double> c) const;
    CyclicFunction modulated(long long k) const;  // multiply by e(2 pi i k n / N)
};

// U_1 = |mean|; U_{d+1}(f)^(2^(d+1)) = E_h U_d(f_h conj f)^(2^d).
// The d = 2 case is cross-checked against the autocorrelation fast path and
// aborts on disagreement beyond 1e-12.
double gowers_recursive(const CyclicFunction& f, int d);

// (E_{n, h_1..h_d} prod_eps C^{|eps|} f(n + eps.h))^(1/2^d); d <= 4
double gowers_parallelepiped(const CyclicFunction& f, int d);

// E_{n, h} prod_eps C^{|eps|} f_eps(n + eps.h) over 2^d functions of equal modulus
std::complex<double> gowers_inner(std::span<const CyclicFunction> fs, int d);

}  // namespace ergo
