#include "ergo/gowers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ergo {

// ------------------------------ CyclicFunction --------------------------------

CyclicFunction CyclicFunction::from_values(std::vector<std::complex<double>> vals) {
    if (vals.empty()) throw std::invalid_argument("cyclic function needs N >= 1");
    CyclicFunction f;
    f.N = static_cast<long long>(vals.size());
    f.v = std::move(vals);
    f.bound = 0.0;
    for (auto& z : f.v) f.bound = std::max(f.bound, std::abs(z));
    return f;
}

CyclicFunction CyclicFunction::delta(long long N) {
    std::vector<std::complex<double>> v(static_cast<std::size_t>(N), {0.0, 0.0});
    v[0] = {1.0, 0.0};
    return from_values(std::move(v));
}

CyclicFunction CyclicFunction::character(long long N, long long k) {
    std::vector<std::complex<double>> v(static_cast<std::size_t>(N));
    long long kk = ((k % N) + N) % N;
    for (long long n = 0; n < N; ++n) {
        double a = 2.0 * M_PI * static_cast<double>((kk * n) % N) / static_cast<double>(N);
        v[static_cast<std::size_t>(n)] = {std::cos(a), std::sin(a)};
    }
    return from_values(std::move(v));
}

CyclicFunction CyclicFunction::constant(long long N, std::complex<double> c) {
    return from_values(std::vector<std::complex<double>>(static_cast<std::size_t>(N), c));
}

CyclicFunction CyclicFunction::shifted(long long h) const {
    CyclicFunction g;
    g.N = N;
    g.bound = bound;
    g.v.resize(v.size());
    for (long long n = 0; n < N; ++n) g.v[static_cast<std::size_t>(n)] = at(n + h);
    return g;
}

CyclicFunction CyclicFunction::scaled(std::complex<double> c) const {
    CyclicFunction g;
    g.N = N;
    g.bound = bound * std::abs(c);
    g.v.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) g.v[i] = v[i] * c;
    return g;
}

CyclicFunction CyclicFunction::modulated(long long k) const {
    CyclicFunction g;
    g.N = N;
    g.bound = bound;
    g.v.resize(v.size());
    long long kk = ((k % N) + N) % N;
    for (long long n = 0; n < N; ++n) {
        double a = 2.0 * M_PI * static_cast<double>((kk * n) % N) / static_cast<double>(N);
        g.v[static_cast<std::size_t>(n)] = v[static_cast<std::size_t>(n)] * std::complex<double>{std::cos(a), std::sin(a)};
    }
    return g;
}

// ------------------------------ recursion --------------------------------------

namespace {

// E_n f(n+h) conj(f(n)) with order-independent accumulation
std::complex<double> autocorrelation(const CyclicFunction& f, long long h, double term_bound) {
    ExactCSum s(term_bound);
    for (long long n = 0; n < f.N; ++n) s.add(f.at(n + h) * std::conj(f.at(n)));
    return s.mean();
}

double recursive_impl(const CyclicFunction& f, int d, double term_bound) {
    if (d == 1) {
        ExactCSum s(term_bound);
        for (auto& z : f.v) s.add(z);
        return std::abs(s.mean());
    }
    // U_d(f)^(2^d) = E_h U_{d-1}(f_h conj f)^(2^(d-1))
    const double diff_bound = term_bound * term_bound;
    ExactSum acc(std::pow(diff_bound, 1 << (d - 1)));
    for (long long h = 0; h < f.N; ++h) {
        CyclicFunction g;
        g.N = f.N;
        g.bound = diff_bound;
        g.v.resize(f.v.size());
        for (long long n = 0; n < f.N; ++n)
            g.v[static_cast<std::size_t>(n)] = f.at(n + h) * std::conj(f.at(n));
        double u = recursive_impl(g, d - 1, diff_bound);
        acc.add(std::pow(u, 1 << (d - 1)));
    }
    double mean = std::max(acc.mean(), 0.0);
    return std::pow(mean, 1.0 / static_cast<double>(1 << d));
}

}  // namespace

double gowers_recursive(const CyclicFunction& f, int d) {
    if (d < 1) throw std::invalid_argument("gowers degree must be >= 1");
    if (d > 6) throw std::invalid_argument("recursive gowers capped at d <= 6");
    if (d >= 4 && f.N > 64) throw std::invalid_argument("recursive gowers with d >= 4 capped at N <= 64");
    if (f.N < 1) throw std::invalid_argument("empty cyclic function");
    const double B = std::max(f.bound, 1e-300);
    double value = recursive_impl(f, d, B);
    if (d == 2) {
        // autocorrelation fast path: U_2^4 = E_h |c(h)|^2
        ExactSum s(std::pow(B, 4));
        for (long long h = 0; h < f.N; ++h) s.add(std::norm(autocorrelation(f, h, B * B)));
        double fast = std::pow(std::max(s.mean(), 0.0), 0.25);
        if (std::abs(fast - value) > 1e-12 * std::max(1.0, std::pow(B, 2)))
            throw std::runtime_error("gowers d=2 fast path disagrees with the recursion: " +
                                     std::to_string(fast) + " vs " + std::to_string(value));
        return fast;
    }
    return value;
}

// ------------------------------ parallelepiped ---------------------------------

double gowers_parallelepiped(const CyclicFunction& f, int d) {
    if (d < 1) throw std::invalid_argument("gowers degree must be >= 1");
    if (d > 4) throw std::invalid_argument("parallelepiped gowers capped at d <= 4");
    const long long N = f.N;
    double cost = std::pow(static_cast<double>(N), d + 1);
    if (cost > 2.5e8) throw std::invalid_argument("parallelepiped budget exceeded");

    const double B = std::max(f.bound, 1e-300);
    double term_bound = 1.0;
    for (int i = 0; i < (1 << d); ++i) term_bound *= B;

    const long long total = N;  // parallel over n, odometer over h inside
    std::vector<ExactCSum> partial;
    partial.reserve(static_cast<std::size_t>(total));
    for (long long i = 0; i < total; ++i) partial.emplace_back(term_bound);

    run_chunks(total, 4, [&](std::size_t, std::int64_t b, std::int64_t e) {
        for (std::int64_t n = b; n < e; ++n) {
            std::vector<long long> h(static_cast<std::size_t>(d), 0);
            for (;;) {
                // product over eps in {0,1}^d
                std::complex<double> prod{1.0, 0.0};
                for (unsigned eps = 0; eps < (1u << d); ++eps) {
                    long long arg = n;
                    for (int j = 0; j < d; ++j)
                        if (eps & (1u << j)) arg += h[static_cast<std::size_t>(j)];
                    std::complex<double> z = f.at(arg);
                    prod *= (__builtin_popcount(eps) & 1) ? std::conj(z) : z;
                }
                partial[static_cast<std::size_t>(n)].add(prod);
                int j = 0;
                while (j < d && ++h[static_cast<std::size_t>(j)] == N) h[static_cast<std::size_t>(j++)] = 0;
                if (j == d) break;
            }
        }
    });
    ExactCSum acc(term_bound);
    for (auto& p : partial) acc.merge(p);
    double mean = std::max(acc.mean().real(), 0.0);
    return std::pow(mean, 1.0 / static_cast<double>(1 << d));
}

std::complex<double> gowers_inner(std::span<const CyclicFunction> fs, int d) {
    if (d < 1 || d > 4) throw std::invalid_argument("gowers inner product needs 1 <= d <= 4");
    if (fs.size() != (1u << d)) throw std::invalid_argument("gowers inner product needs 2^d functions");
    const long long N = fs[0].N;
    for (auto& f : fs)
        if (f.N != N) throw std::invalid_argument("gowers inner product: modulus mismatch");
    double cost = std::pow(static_cast<double>(N), d + 1);
    if (cost > 2.5e8) throw std::invalid_argument("gowers inner budget exceeded");

    double term_bound = 1.0;
    for (auto& f : fs) term_bound *= std::max(f.bound, 1e-300);

    std::vector<ExactCSum> partial;
    partial.reserve(static_cast<std::size_t>(N));
    for (long long i = 0; i < N; ++i) partial.emplace_back(term_bound);

    run_chunks(N, 4, [&](std::size_t, std::int64_t b, std::int64_t e) {
        for (std::int64_t n = b; n < e; ++n) {
            std::vector<long long> h(static_cast<std::size_t>(d), 0);
            for (;;) {
                std::complex<double> prod{1.0, 0.0};
                for (unsigned eps = 0; eps < (1u << d); ++eps) {
                    long long arg = n;
                    for (int j = 0; j < d; ++j)
                        if (eps & (1u << j)) arg += h[static_cast<std::size_t>(j)];
                    std::complex<double> z = fs[eps].at(arg);
                    prod *= (__builtin_popcount(eps) & 1) ? std::conj(z) : z;
                }
                partial[static_cast<std::size_t>(n)].add(prod);
                int j = 0;
                while (j < d && ++h[static_cast<std::size_t>(j)] == N) h[static_cast<std::size_t>(j++)] = 0;
                if (j == d) break;
            }
        }
    });
    ExactCSum acc(term_bound);
    for (auto& p : partial) acc.merge(p);
    return acc.mean();
}

}  // namespace ergo
