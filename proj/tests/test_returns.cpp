#include <doctest.h>

#include <random>

#include "ergo/parallel.hpp"
#include "ergo/returns.hpp"

using namespace ergo;
using cplx = std::complex<double>;

namespace {

ArcSet arc03() { return ArcSet::from_endpoints({{0.0, 0.3}}); }

}  // namespace

TEST_SUITE("returns") {

TEST_CASE("triple return basics") {
    auto a = arc03();
    auto al = Irrational::parse("sqrt2");
    auto be = Irrational::parse("sqrt3");

    CHECK(triple_return(a, al, be, 0) == doctest::Approx(0.3).epsilon(1e-15));
    auto full = ArcSet::full_circle();
    for (long long n : {0LL, 1LL, 12345LL}) CHECK(triple_return(full, al, be, n) == 1.0);

    SUBCASE("monte carlo oracle at n = 1") {
        double exact = triple_return(a, al, be, 1);
        std::mt19937_64 rng(424242);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const long long samples = 10'000'000;
        double da = al.value(), db = be.value();
        long long hits = 0;
        auto inside = [](double x) {
            x -= std::floor(x);
            return x < 0.3;
        };
        for (long long i = 0; i < samples; ++i) {
            double x = u(rng);
            if (inside(x) && inside(x + da) && inside(x + db)) ++hits;
        }
        double mc = static_cast<double>(hits) / samples;
        CHECK(std::abs(mc - exact) < 3e-4);
    }
}

TEST_CASE("triple return properties") {
    auto a = ArcSet::from_endpoints({{0.05, 0.2}, {0.4, 0.55}});
    auto al = Irrational::parse("sqrt2");
    auto be = Irrational::parse("sqrt3");
    double mu = a.measure();
    for (long long n = 0; n <= 500; ++n) {
        double r = triple_return(a, al, be, n);
        CHECK(r >= 0.0);
        CHECK(r <= mu + 1e-15);
        // swap symmetry is exact
        CHECK(triple_return(a, be, al, n) == r);
    }
    // alpha = beta degenerates to the double intersection, exactly
    for (long long n = 0; n <= 200; ++n)
        CHECK(triple_return(a, al, al, n) == double_return(a, al, n));
}

TEST_CASE("scan_large_returns on the standard configuration") {
    auto rep = scan_large_returns(arc03(), Irrational::parse("sqrt2"), Irrational::parse("sqrt3"),
                                  20000, 0.02);
    CHECK(rep.hypotheses_verified);
    CHECK(rep.threshold == doctest::Approx(0.007).epsilon(1e-12));
    long long members = 0;
    for (long long n = 1; n <= rep.n_max; ++n)
        if (rep.member[static_cast<std::size_t>(n)]) {
            ++members;
            CHECK(rep.values[static_cast<std::size_t>(n)] > 0.007);
        }
    CHECK(members > 0);
    CHECK(rep.density * static_cast<double>(rep.n_max) == doctest::Approx(static_cast<double>(members)));
    CHECK(rep.jensen_lhs >= rep.jensen_rhs);

    // max gap consistent with the bitmap
    long long gap = 0, prev = 0;
    for (long long n = 1; n <= rep.n_max; ++n)
        if (rep.member[static_cast<std::size_t>(n)]) {
            gap = std::max(gap, n - prev);
            prev = n;
        }
    gap = std::max(gap, rep.n_max - prev);
    CHECK(rep.max_gap == gap);
}

TEST_CASE("scan degenerations") {
    SUBCASE("full circle: every n is a member, max gap 1") {
        auto rep = scan_large_returns(ArcSet::full_circle(), Irrational::parse("sqrt2"),
                                      Irrational::parse("sqrt3"), 500, 0.1);
        for (long long n = 1; n <= 500; ++n) CHECK(rep.member[static_cast<std::size_t>(n)] == 1);
        CHECK(rep.max_gap == 1);
        CHECK(rep.density == 1.0);
    }
    SUBCASE("eps above mu^3 makes the threshold negative") {
        auto rep = scan_large_returns(arc03(), Irrational::parse("sqrt2"), Irrational::parse("sqrt3"),
                                      500, 0.05);
        CHECK(rep.threshold < 0.0);
        CHECK(rep.density == 1.0);
    }
    SUBCASE("rational rotation flags the hypotheses but still scans") {
        auto rep = scan_large_returns(arc03(), Irrational::parse("1/2"), Irrational::parse("sqrt3"),
                                      100, 0.02);
        CHECK(!rep.hypotheses_verified);
        CHECK(rep.values.size() == 101);
    }
}

TEST_CASE("sieve and von Mangoldt tables") {
    auto t = sieve(100000);
    CHECK(t.lambda[8] == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(t.lambda[6] == 0.0);
    CHECK(t.lambda_prime(8) == 0.0);
    CHECK(t.lambda_prime(7) == doctest::Approx(std::log(7.0)).epsilon(1e-15));
    CHECK(t.pi(10) == 4);
    CHECK(t.nth_prime(4) == 7);
    CHECK(t.pi(t.nth_prime(100)) == 100);

    // Chebyshev identity re-checked here on a sample beyond the constructor
    for (long long n : {9999LL, 10000LL}) {
        double s = 0;
        for (long long d = 1; d <= n; ++d)
            if (n % d == 0) s += t.lambda[static_cast<std::size_t>(d)];
        CHECK(std::abs(s - std::log(static_cast<double>(n))) < 1e-9);
    }

    CHECK_THROWS(sieve(1));
    CHECK_THROWS(t.lambda_prime(100001));
}

TEST_CASE("prime table cache round trip") {
    auto t = sieve(5000);
    t.save("/tmp/ergo_prime_cache_test.bin");
    auto u = PrimeTables::load("/tmp/ergo_prime_cache_test.bin");
    CHECK(u.limit == t.limit);
    CHECK(u.primes == t.primes);
    for (long long n = 0; n <= 5000; ++n) {
        CHECK(u.lambda[static_cast<std::size_t>(n)] == t.lambda[static_cast<std::size_t>(n)]);
        CHECK(u.is_prime[static_cast<std::size_t>(n)] == t.is_prime[static_cast<std::size_t>(n)]);
    }
}

TEST_CASE("W-tricked von Mangoldt weights") {
    auto t = sieve(2000);
    SUBCASE("w = 5: W = 6, phi = 2, worked value at n = 2, r = 1") {
        CHECK(w_product(5) == 6);
        CHECK(euler_phi(6) == 2);
        CHECK(mangoldt_w(5, 1, 2, t) == doctest::Approx(std::log(13.0) / 3.0).epsilon(1e-12));
    }
    SUBCASE("composite W n + r vanishes") {
        // 6*3 + 3 = 21 composite, and gcd(3, 6) > 1
        CHECK(mangoldt_w(5, 3, 3, t) == 0.0);
    }
    SUBCASE("w = 2: empty product, plain Lambda'") {
        CHECK(w_product(2) == 1);
        for (long long n : {7LL, 8LL, 13LL})
            CHECK(mangoldt_w(2, 0, n, t) == t.lambda_prime(n));
    }
    SUBCASE("range guard") { CHECK_THROWS(mangoldt_w(5, 1, 1000, t)); }
}

TEST_CASE("prime average comparison") {
    auto t = sieve(100000);
    SUBCASE("zero series: zero difference") {
        CorrelationSeries z;
        z.n_min = 0;
        z.n_max = 99999;
        z.values.assign(100000, cplx{0.0, 0.0});
        auto rep = prime_average_compare(z, {1000, 10000, 100000}, t);
        for (auto& row : rep.rows) CHECK(row.difference == 0.0);
    }
    SUBCASE("constant series: difference is the Chebyshev defect") {
        CorrelationSeries one;
        one.n_min = 0;
        one.n_max = 99999;
        one.values.assign(100000, cplx{1.0, 0.0});
        auto rep = prime_average_compare(one, {1000, 10000, 100000}, t);
        for (auto& row : rep.rows) {
            CHECK(std::abs(row.prime_mean - cplx{1.0, 0.0}) < 1e-12);
            // weighted mean approaches 1 by the prime number theorem
            CHECK(row.difference < 0.25);
        }
        CHECK(rep.rows[2].difference < rep.rows[0].difference);
    }
    SUBCASE("bound precondition") {
        CorrelationSeries big;
        big.n_min = 0;
        big.n_max = 999;
        big.values.assign(1000, cplx{2.0, 0.0});
        CHECK_THROWS(prime_average_compare(big, {1000}, t));
    }
}

TEST_CASE("W-trick average comparison: trivial rows") {
    auto t = sieve(7000);
    System s = System::torus(1);
    s.add_transform("T", {Irrational::parse("sqrt2")});
    s.add_transform("S", {Irrational::parse("sqrt3")});
    SUBCASE("constant observables reduce to the scalar weight defect") {
        auto one = Observable::single(TrigPoly::constant(1, {1.0, 0.0}));
        auto rep = wtrick_average_compare(s, one, one, "T", "S", 5, {256, 1024}, t);
        CHECK(rep.big_w == 6);
        CHECK(rep.residues == std::vector<long long>{1, 5});
        for (auto& row : rep.rows) {
            for (std::size_t ri = 0; ri < row.per_residue.size(); ++ri) {
                // oracle: | (1/N) sum (Lambda'_{w,r}(n) - 1) |
                long long r = rep.residues[ri];
                NeumaierSum acc;
                for (long long n = 1; n <= row.n_cap; ++n) acc.add(mangoldt_w(5, r, n, t) - 1.0);
                CHECK(row.per_residue[ri] == doctest::Approx(std::abs(acc.value() / row.n_cap)).epsilon(1e-9));
            }
        }
    }
    SUBCASE("zero observables give zero") {
        TrigPoly z;
        z.dim = 1;
        auto zero = Observable::single(z);
        auto rep = wtrick_average_compare(s, zero, zero, "T", "S", 5, {256}, t);
        CHECK(rep.rows[0].max_over_residues == 0.0);
    }
}

TEST_CASE("shifted prime returns") {
    auto t = sieve(300000);
    auto al = Irrational::parse("sqrt2");
    auto be = Irrational::parse("sqrt3");
    SUBCASE("full circle: fraction 1") {
        auto rep = shifted_prime_returns(ArcSet::full_circle(), al, be, 2000, 0.05, t);
        CHECK(rep.fraction == 1.0);
        CHECK(rep.lower_density_proxy == 1.0);
    }
    SUBCASE("threshold degeneration: eps >= mu^3 gives membership a.e.") {
        auto rep = shifted_prime_returns(arc03(), al, be, 2000, 0.05, t);
        CHECK(rep.threshold < 0.0);
        CHECK(rep.fraction == 1.0);
    }
    SUBCASE("plus-one shift works and insufficient tables throw") {
        auto rep = shifted_prime_returns(arc03(), al, be, 500, 0.02, t, +1);
        CHECK(rep.count == 500);
        CHECK(rep.lower_density_proxy > 0.0);
        CHECK_THROWS(shifted_prime_returns(arc03(), al, be, 10'000'000, 0.02, t));
    }
    SUBCASE("nontrivial threshold: positive proxy, stable under doubling") {
        auto r1 = shifted_prime_returns(arc03(), al, be, 10000, 0.02, t);
        auto r2 = shifted_prime_returns(arc03(), al, be, 20000, 0.02, t);
        CHECK(r1.lower_density_proxy > 0.0);
        CHECK(r2.lower_density_proxy > 0.0);
        CHECK(std::abs(r1.lower_density_proxy - r2.lower_density_proxy) <= 0.05);
    }
}

TEST_CASE("arc set validation") {
    CHECK_THROWS(ArcSet::from_endpoints({{0.5, 0.4}}));
    CHECK_THROWS(ArcSet::from_endpoints({{0.0, 0.5}, {0.4, 0.6}}));
    CHECK(ArcSet::from_endpoints({{0.0, 1.0}}).measure() == 1.0);
}

}  // TEST_SUITE
