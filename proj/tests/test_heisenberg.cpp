#include <doctest.h>

#include <random>

#include "ergo/fixed64.hpp"
#include "ergo/heisenberg.hpp"

using namespace ergo;

namespace {

std::mt19937_64& rng() {
    static std::mt19937_64 r(90125);
    return r;
}

HeisenbergElement random_element(double scale = 2.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return {u(rng()), u(rng()), u(rng())};
}

double dist(const HeisenbergElement& a, const HeisenbergElement& b) {
    return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}

}  // namespace

TEST_SUITE("heisenberg") {

TEST_CASE("group law basics") {
    HeisenbergElement e{0, 0, 0};
    auto g = random_element();
    CHECK(dist(nil_mul(e, g), g) == 0.0);

    // non-commutativity witness
    HeisenbergElement a{1, 0, 0}, b{0, 1, 0};
    auto ab = nil_mul(a, b);
    auto ba = nil_mul(b, a);
    CHECK(ab.z == 1.0);
    CHECK(ba.z == 0.0);

    for (int i = 0; i < 50; ++i) {
        auto h = random_element();
        auto prod = nil_mul(h, nil_inv(h));
        CHECK(dist(prod, e) < 1e-12);
    }
}

TEST_CASE("associativity on random triples") {
    for (int i = 0; i < 100; ++i) {
        auto a = random_element(), b = random_element(), c = random_element();
        auto lhs = nil_mul(nil_mul(a, b), c);
        auto rhs = nil_mul(a, nil_mul(b, c));
        CHECK(dist(lhs, rhs) < 1e-12);
    }
}

TEST_CASE("commutators are central (2-step)") {
    for (int i = 0; i < 50; ++i) {
        auto g = random_element(), h = random_element(), k = random_element();
        auto c = nil_commutator(g, h);
        CHECK(std::abs(c.x) < 1e-12);
        CHECK(std::abs(c.y) < 1e-12);
        auto lhs = nil_mul(c, k);
        auto rhs = nil_mul(k, c);
        CHECK(dist(lhs, rhs) < 1e-12);
    }
}

TEST_CASE("closed-form powers") {
    auto g = random_element();
    CHECK(dist(nil_pow(g, 0), {0, 0, 0}) == 0.0);

    auto g2 = nil_pow(g, 2);
    CHECK(g2.x == doctest::Approx(2 * g.x).epsilon(1e-15));
    CHECK(g2.z == doctest::Approx(2 * g.z + g.x * g.y).epsilon(1e-14));

    SUBCASE("agrees with repeated multiplication to 1e-9 for |n| <= 1000") {
        // the z coordinate grows like n^2 x y, so the tolerance is relative to
        // the coordinate magnitude; the iterated oracle carries its own
        // accumulated rounding at the same scale
        auto rel = [](const HeisenbergElement& p, const HeisenbergElement& q2) {
            double scale = std::max({1.0, std::abs(p.x), std::abs(p.y), std::abs(p.z)});
            return dist(p, q2) / scale;
        };
        for (int inst = 0; inst < 5; ++inst) {
            auto h = random_element(1.0);
            HeisenbergElement acc{0, 0, 0};
            for (long long n = 1; n <= 1000; ++n) {
                acc = nil_mul(acc, h);
                if (n % 97 == 0 || n == 1000) CHECK(rel(acc, nil_pow(h, n)) < 1e-9);
            }
            HeisenbergElement accneg{0, 0, 0};
            auto hinv = nil_inv(h);
            for (long long n = 1; n <= 1000; ++n) {
                accneg = nil_mul(accneg, hinv);
                if (n % 131 == 0 || n == 1000) CHECK(rel(accneg, nil_pow(h, -n)) < 1e-9);
            }
        }
    }

    SUBCASE("pow is a homomorphism in the exponent") {
        std::uniform_int_distribution<long long> d(-1000, 1000);
        for (int i = 0; i < 100; ++i) {
            auto h = random_element(1.0);
            long long m = d(rng()), n = d(rng());
            auto lhs = nil_pow(h, m + n);
            auto rhs = nil_mul(nil_pow(h, m), nil_pow(h, n));
            CHECK(dist(lhs, rhs) < 1e-9);
        }
    }
}

TEST_CASE("reduction to the fundamental domain") {
    SUBCASE("already reduced: gamma = 0") {
        HeisenbergElement g{0.25, 0.5, 0.75};
        auto r = reduce(g);
        CHECK(r.a == 0);
        CHECK(r.b == 0);
        CHECK(r.c == 0);
        CHECK(dist(r.rep, g) == 0.0);
    }
    SUBCASE("worked example (1.5, 2.25, 0)") {
        auto r = reduce({1.5, 2.25, 0.0});
        CHECK(r.b == -2);
        CHECK(r.a == -1);
        CHECK(r.c == 3);
        CHECK(r.rep.x == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(r.rep.y == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(std::abs(r.rep.z) < 1e-15);
    }
    SUBCASE("representatives land in [0,1)^3") {
        for (int i = 0; i < 200; ++i) {
            auto g = random_element(5.0);
            auto r = reduce(g);
            CHECK(r.rep.x >= 0.0);
            CHECK(r.rep.x < 1.0);
            CHECK(r.rep.y >= 0.0);
            CHECK(r.rep.y < 1.0);
            CHECK(r.rep.z >= 0.0);
            CHECK(r.rep.z < 1.0);
        }
    }
    SUBCASE("right lattice action leaves the representative") {
        std::uniform_int_distribution<long long> d(-3, 3);
        for (int i = 0; i < 100; ++i) {
            auto g = random_element(3.0);
            HeisenbergElement gamma{static_cast<double>(d(rng())), static_cast<double>(d(rng())),
                                    static_cast<double>(d(rng()))};
            auto r1 = reduce(g);
            auto r2 = reduce(nil_mul(g, gamma));
            CHECK(dist(r1.rep, r2.rep) < 1e-9);
        }
    }
}

TEST_CASE("nilsequences") {
    SUBCASE("x-only observables degenerate to rotation sequences") {
        auto f = NilObservable::character(1, 0);
        HeisenbergElement a{0.3137, 0.777, 0.05};
        HeisenbergElement x0{0.2, 0.6, 0.9};
        for (long long n : {0LL, 1LL, 17LL, 400LL}) {
            auto got = nilsequence(f, a, x0, n);
            double frac = std::fmod(n * a.x + x0.x, 1.0);
            if (frac < 0) frac += 1.0;
            double ang = 2 * M_PI * frac;
            CHECK(std::abs(got - std::complex<double>{std::cos(ang), std::sin(ang)}) < 1e-9);
        }
    }
    SUBCASE("n = 0 evaluates at the reduced base point") {
        auto f = NilObservable::character(2, -1);
        HeisenbergElement a{0.1, 0.2, 0.3};
        HeisenbergElement x0{1.4, -0.3, 2.2};
        CHECK(std::abs(nilsequence(f, a, x0, 0) - f.eval_reduced(reduce(x0).rep)) < 1e-15);
    }
    SUBCASE("z-coordinate table sequence agrees with the step-by-step oracle") {
        NilObservable f;
        f.kind = NilObservable::Kind::ReducedTable;
        f.grid = 32;
        f.table.resize(32 * 32 * 32);
        for (int i = 0; i < 32; ++i)
            for (int j = 0; j < 32; ++j)
                for (int k = 0; k < 32; ++k)
                    f.table[(static_cast<std::size_t>(i) * 32 + j) * 32 + k] = {(k + 0.5) / 32.0, 0.0};
        HeisenbergElement a{Irrational::parse("sqrt2").value(), Irrational::parse("sqrt3").value(), 0.0};
        HeisenbergElement x0{0, 0, 0};
        HeisenbergElement acc{0, 0, 0};
        for (long long n = 1; n <= 1000; ++n) {
            acc = nil_mul(a, acc);  // left multiplication, matching a^n x0
            if (n % 111 == 0) {
                auto got = nilsequence(f, a, x0, n);
                auto want = f.eval_reduced(reduce(acc).rep);
                CHECK(std::abs(got - want) < 1e-12);
            }
        }
    }
}

TEST_CASE("equidistribution diagnostics") {
    SUBCASE("independent generators: small Weyl sums at N = 1e5") {
        HeisenbergElement a{Irrational::parse("sqrt2").value(), Irrational::parse("sqrt3").value(), 0.0};
        auto rep = equidistribution_report(a, {0, 0, 0}, 100000, 4, 4);
        CHECK(rep.max_weyl_modulus <= 0.02);
    }
    SUBCASE("rational x-generator resonates") {
        HeisenbergElement a{0.5, 0.0, 0.0};
        auto rep = equidistribution_report(a, {0, 0, 0}, 4096, 2, 2);
        bool found = false;
        for (auto& w : rep.weyl)
            if (w.j == 2 && w.k == 0) {
                CHECK(std::abs(w.sum) == doctest::Approx(1.0).epsilon(1e-12));
                found = true;
            }
        CHECK(found);
    }
    SUBCASE("single sample: all Weyl sums have modulus 1") {
        HeisenbergElement a{0.3, 0.4, 0.1};
        auto rep = equidistribution_report(a, {0.2, 0.9, 0.0}, 1, 3, 3);
        for (auto& w : rep.weyl) CHECK(std::abs(w.sum) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

}  // TEST_SUITE
