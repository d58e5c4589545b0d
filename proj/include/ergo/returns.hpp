// returns.hpp — exact triple-intersection measures on circle rotations, large
// return scanning with syndeticity diagnostics, and the shifted-primes
// pipeline with von Mangoldt W-trick weights.
//
// Syndeticity and lower density have no finite value; reports carry the max
// gap (with stability under range doubling left to the caller) and the min
// running density over the upper half of the scan, and claim nothing more.

#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "ergo/correlation.hpp"
#include "ergo/systems.hpp"

namespace ergo {

// ------------------------------ arcs ------------------------------------------

struct ArcSet {
    using U128 = unsigned __int128;
    static constexpr U128 kTurn = static_cast<U128>(1) << 64;
    struct Arc { U128 lo, hi; };
    std::vector<Arc> arcs;  // sorted, disjoint, within [0, kTurn]

    static ArcSet from_endpoints(const std::vector<std::pair<double, double>>& eps);
    static ArcSet full_circle();
    double measure() const;
    U128 raw_measure() const;
};

// exact sweep measure of A cap (A - n alpha) cap (A - n beta)
double triple_return(const ArcSet& a, const Irrational& alpha, const Irrational& beta, long long n);
// exact double intersection, used as the degenerate-case oracle
double double_return(const ArcSet& a, const Irrational& alpha, long long n);

struct ReturnSetReport {
    double eps{0.0};
    double threshold{0.0};  // mu(A)^3 - eps
    double mu_a{0.0};
    long long n_max{0};
    std::vector<std::uint8_t> member;  // indexed 1..n_max
    std::vector<double> values;        // r(n), exact sweep per n
    long long max_gap{0};              // gaps measured against 0 and n_max as fences
    double density{0.0};
    double lower_density_proxy{0.0};   // min running density over the upper half
    double jensen_lhs{0.0};            // mu(A) = integral of the indicator cubed's proxy
    double jensen_rhs{0.0};            // mu(A)^3
    bool hypotheses_verified{false};   // ergodicity audit for alpha, beta, alpha-beta
    AuditReport audit;
};

ReturnSetReport scan_large_returns(const ArcSet& a, const Irrational& alpha, const Irrational& beta,
                                   long long n_max, double eps);

// ------------------------------ primes ----------------------------------------

struct PrimeTables {
    long long limit{0};
    std::vector<std::uint8_t> is_prime;
    std::vector<double> lambda;     // von Mangoldt
    std::vector<long long> primes;  // ascending
    long long pi(long long n) const;        // number of primes <= n
    double lambda_prime(long long n) const; // Lambda restricted to primes
    long long nth_prime(long long k) const; // 1-based

    void save(const std::string& path) const;
    static PrimeTables load(const std::string& path);
};

// sieve with Chebyshev validation sum_{d | n} Lambda(d) = log n on construction
PrimeTables sieve(long long n_limit);

// phi(W)/W * Lambda'(W n + r) with W the product of primes below w
double mangoldt_w(long long w, long long r, long long n, const PrimeTables& t);
long long w_product(long long w);
long long euler_phi(long long n);

struct PrimeAverageReport {
    struct Row {
        long long n_cap;
        std::complex<double> prime_mean;     // (1/pi(N)) sum_{p < N} a_p
        std::complex<double> weighted_mean;  // (1/N) sum_{n < N} Lambda'(n) a_n
        double difference;
    };
    std::vector<Row> rows;
    bool decreasing{false};
};

// pre: |a| <= 1 and the series covers [0, max cap)
PrimeAverageReport prime_average_compare(const CorrelationSeries& a, std::vector<long long> caps,
                                         const PrimeTables& t);

struct WtrickReport {
    struct Row {
        long long n_cap;
        double max_over_residues;  // max_r || (1/N) sum (Lambda'_{w,r}(n) - 1) T^{Wn+r} f S^{Wn+r} g ||_2
        std::vector<double> per_residue;
    };
    long long w{0}, big_w{0};
    std::vector<long long> residues;
    std::vector<Row> rows;
    bool decreasing{false};
};

WtrickReport wtrick_average_compare(const System& sys, const Observable& f, const Observable& g,
                                    const std::string& label_t, const std::string& label_s,
                                    long long w, std::vector<long long> caps, const PrimeTables& t);

struct ShiftedPrimeReport {
    double eps{0.0};
    double threshold{0.0};
    double mu_a{0.0};
    long long count{0};            // primes scanned
    int shift_sign{-1};            // p - 1 by default, p + 1 by flag
    double fraction{0.0};          // members / count
    double lower_density_proxy{0.0};  // min running density over the second half
    std::vector<double> running_density;
    AuditReport audit;
    bool hypotheses_verified{false};
};

ShiftedPrimeReport shifted_prime_returns(const ArcSet& a, const Irrational& alpha, const Irrational& beta,
                                         long long n_primes, double eps, const PrimeTables& t,
                                         int shift_sign = -1);

}  // namespace ergo
