#include <doctest.h>

#include <random>

#include "ergo/seminorms.hpp"

using namespace ergo;
using cplx = std::complex<double>;

namespace {

System two_rotations() {
    System s = System::torus(1);
    s.add_transform("T", {Irrational::parse("sqrt2")});
    s.add_transform("S", {Irrational::parse("sqrt3")});
    return s;
}

Observable chi(int k, cplx c = {1.0, 0.0}) { return Observable::single(TrigPoly::character(1, {k}, c)); }

}  // namespace

TEST_SUITE("seminorms") {

TEST_CASE("constant function has every seminorm equal to its modulus") {
    System s = two_rotations();
    auto one = chi(0);
    for (int d = 1; d <= 2; ++d) {
        std::vector<std::string> ts(static_cast<std::size_t>(d), "T");
        if (d == 2) ts[1] = "S";
        auto est = box_seminorm(s, one, ts, WindowSchedule::uniform(d, 128));
        CHECK(est.value == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(est.diagnostic < 1e-12);
        CHECK(est.clip_magnitude == 0.0);
    }
}

TEST_CASE("character seminorms on an ergodic rotation") {
    System s = two_rotations();
    auto f = chi(1);

    SUBCASE("d = 1 estimates |mean| ~ 0") {
        auto est = box_seminorm(s, f, {"T"}, WindowSchedule::uniform(1, 1 << 10));
        CHECK(est.value < 0.05);
    }
    SUBCASE("d = 2 is exactly 1: difference functions are unimodular constants") {
        auto est = box_seminorm(s, f, {"T", "S"}, WindowSchedule::uniform(2, 1 << 10));
        CHECK(est.value == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(est.diagnostic < 1e-12);
    }
    SUBCASE("closed form sum |fhat|^4 for a two-term poly at d = 2") {
        // f = (e_1 + e_2)/sqrt(2): sum |c_k|^4 = 2 * (1/2)^2 = 1/2, so the
        // degree-2 seminorm is (1/2)^(1/4)
        TrigPoly p;
        p.dim = 1;
        double r = 1.0 / std::sqrt(2.0);
        p.terms[{1}] = r;
        p.terms[{2}] = r;
        auto est = box_seminorm(s, Observable::single(p), {"T", "S"}, WindowSchedule::uniform(2, 1 << 10));
        CHECK(est.value == doctest::Approx(std::pow(0.5, 0.25)).epsilon(0.02));
    }
}

TEST_CASE("scaling homogeneity") {
    System s = two_rotations();
    TrigPoly p;
    p.dim = 1;
    p.terms[{1}] = cplx{0.3, 0.4};
    p.terms[{3}] = cplx{-0.2, 0.1};
    auto f = Observable::single(p);
    TrigPoly q = p;
    for (auto& [k, c] : q.terms) c *= 2.0;
    auto g = Observable::single(q);
    auto ef = box_seminorm(s, f, {"T", "S"}, WindowSchedule::uniform(2, 256));
    auto eg = box_seminorm(s, g, {"T", "S"}, WindowSchedule::uniform(2, 256));
    CHECK(eg.value == doctest::Approx(2.0 * ef.value).epsilon(1e-12));
}

TEST_CASE("estimates stay within the bound product") {
    System s = two_rotations();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int inst = 0; inst < 5; ++inst) {
        TrigPoly p;
        p.dim = 1;
        for (int t = 0; t < 3; ++t) p.terms[{static_cast<int>(rng() % 5) - 2}] += cplx{u(rng), u(rng)};
        auto f = Observable::single(p);
        auto est = box_seminorm(s, f, {"T", "S"}, WindowSchedule::uniform(2, 128));
        CHECK(est.value >= 0.0);
        CHECK(est.value <= f.bound + 1e-9);
    }
}

TEST_CASE("mean-zero grid observable has small d = 1 seminorm") {
    // the grid map is periodic, so the d=1 estimate converges to the norm of
    // the orbit average; a coboundary-style input keeps that at zero
    System s = System::cat_grid(101);
    s.add_transform("M", {}, {1});
    auto f = Observable::single(GridTable::coboundary(101, 1, 0));
    auto est = box_seminorm(s, f, {"M"}, WindowSchedule::uniform(1, 1 << 10));
    CHECK(est.value < 0.05);
}

TEST_CASE("permutation check: characters agree across orders") {
    System s = two_rotations();
    auto rep = permutation_check(s, chi(1), {"T", "S"}, WindowSchedule::uniform(2, 1 << 10));
    CHECK(rep.estimates.size() == 2);
    CHECK(rep.max_relative_difference <= 0.05);

    auto rep1 = permutation_check(s, chi(0), {"T", "S"}, WindowSchedule::uniform(2, 128));
    for (auto& e : rep1.estimates) CHECK(e.value == doctest::Approx(1.0).epsilon(1e-12));

    TrigPoly zero;
    zero.dim = 1;
    auto rep0 = permutation_check(s, Observable::single(zero), {"T", "S"}, WindowSchedule::uniform(2, 128));
    for (auto& e : rep0.estimates) CHECK(e.value == 0.0);
}

TEST_CASE("ergodic collapse check") {
    System s = two_rotations();
    SUBCASE("characters: mixed and collapsed estimates agree within 0.05") {
        auto rep = ergodic_collapse_check(s, chi(1), {"T", "S"}, WindowSchedule::uniform(2, 1 << 10));
        REQUIRE(!rep.refused);
        for (double d : rep.relative_differences) CHECK(d <= 0.05);
        CHECK(rep.mixed.value == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("constant function: exact agreement at 1") {
        auto rep = ergodic_collapse_check(s, chi(0), {"T", "S"}, WindowSchedule::uniform(2, 128));
        REQUIRE(!rep.refused);
        for (auto& e : rep.collapsed) CHECK(e.value == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("rational rotation refuses the check") {
        System r = System::torus(1);
        r.add_transform("T", {Irrational::parse("1/2")});
        r.add_transform("S", {Irrational::parse("sqrt3")});
        auto rep = ergodic_collapse_check(r, chi(1), {"T", "S"}, WindowSchedule::uniform(2, 128));
        CHECK(rep.refused);
        CHECK(rep.collapsed.empty());
    }
}

TEST_CASE("average bound check (finite-scale van der Corput-style bound)") {
    System s = two_rotations();
    SUBCASE("constants: average 1, bound 1, slack 0") {
        std::vector<Observable> fs = {chi(0), chi(0)};
        auto rep = average_bound_check(s, fs, {"T", "S"}, WindowSchedule::uniform(2, 256), 1 << 10);
        CHECK(rep.average_l2 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rep.seminorm_bound == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rep.slack == doctest::Approx(0.0).epsilon(1e-10));
    }
    SUBCASE("mean-zero character: small average, unit bound") {
        std::vector<Observable> fs = {chi(1), chi(0)};
        auto rep = average_bound_check(s, fs, {"T", "S"}, WindowSchedule::uniform(2, 256), 1 << 14);
        CHECK(rep.average_l2 < 0.01);
        CHECK(rep.seminorm_bound == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(rep.slack >= 0.0);
    }
    SUBCASE("zero observable: both sides vanish") {
        TrigPoly zero;
        zero.dim = 1;
        std::vector<Observable> fs = {Observable::single(zero), chi(0)};
        auto rep = average_bound_check(s, fs, {"T", "S"}, WindowSchedule::uniform(2, 128), 256);
        CHECK(rep.average_l2 == 0.0);
        CHECK(rep.seminorm_bound == 0.0);
    }
    SUBCASE("sup-norm precondition is enforced") {
        std::vector<Observable> fs = {chi(0), chi(1, {2.0, 0.0})};
        CHECK_THROWS(average_bound_check(s, fs, {"T", "S"}, WindowSchedule::uniform(2, 128), 256));
    }
}

TEST_CASE("tensor-square inequality on the product system") {
    // |||f (x) conj f|||_{TxT} <= |||f|||_{T,T}^2 on X x X with the diagonal action
    System sq = System::torus(2);
    sq.add_transform("TT", {Irrational::parse("sqrt2"), Irrational::parse("sqrt2")});
    System base = System::torus(1);
    base.add_transform("T", {Irrational::parse("sqrt2")});
    base.add_transform("T2", {Irrational::parse("sqrt2")});

    std::mt19937_64 rng(23);
    for (int inst = 0; inst < 10; ++inst) {
        int k = 1 + static_cast<int>(rng() % 4);
        auto f = chi(k);
        TrigPoly tensor;
        tensor.dim = 2;
        tensor.terms[{k, -k}] = 1.0;  // f (x) conj f
        auto lhs = box_seminorm(sq, Observable::single(tensor), {"TT"}, WindowSchedule::uniform(1, 256));
        auto rhs = box_seminorm(base, f, {"T", "T2"}, WindowSchedule::uniform(2, 256));
        CHECK(lhs.value <= rhs.value * rhs.value + lhs.diagnostic + 2 * rhs.diagnostic + 1e-9);
    }
}

TEST_CASE("schedule validation") {
    System s = two_rotations();
    CHECK_THROWS(box_seminorm(s, chi(1), {"T", "S"}, WindowSchedule::uniform(1, 128)));
    CHECK_THROWS(box_seminorm(s, chi(1), {"T", "S"}, WindowSchedule::uniform(2, 16)));
    CHECK_THROWS(box_seminorm(s, chi(1), {"T", "S", "T", "S"}, WindowSchedule::uniform(4, 128)));
}

}  // TEST_SUITE
