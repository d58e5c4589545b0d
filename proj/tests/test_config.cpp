#include <doctest.h>

#include "ergo/config.hpp"
#include "ergo/correlation.hpp"
#include "ergo/csvio.hpp"

using namespace ergo;

TEST_SUITE("config") {

TEST_CASE("parsing: sections, comments, and errors carry line numbers") {
    auto cfg = Config::parse_text(
        "# header comment\n"
        "[system]\n"
        "type = torus   # trailing comment\n"
        "dim = 2\n"
        "\n"
        "[transform.T]\n"
        "alpha = sqrt2, sqrt3\n",
        "test.cfg");
    CHECK(cfg.get("system", "type") == "torus");
    CHECK(cfg.get_int("system", "dim") == 2);
    CHECK(cfg.get_or("system", "missing", "d") == "d");
    CHECK(cfg.get_int_or("system", "missing", 7) == 7);
    CHECK(cfg.has_section("transform.T"));
    CHECK(cfg.section_names("transform.").size() == 1);

    CHECK_THROWS_WITH_AS(Config::parse_text("[s]\nbad line\n", "x.cfg"),
                         "x.cfg:2: expected key = value", std::runtime_error);
    CHECK_THROWS_WITH_AS(Config::parse_text("key = 1\n", "x.cfg"),
                         "x.cfg:1: key outside any section", std::runtime_error);
    CHECK_THROWS(Config::parse_text("[s\n", "x.cfg"));

    auto bad = Config::parse_text("[s]\nk = abc\n", "y.cfg");
    try {
        bad.get_int("s", "k");
        CHECK(false);
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("y.cfg:2") != std::string::npos);
    }
}

TEST_CASE("system builders") {
    SUBCASE("torus with two transforms") {
        auto cfg = Config::parse_text(
            "[system]\ntype = torus\ndim = 1\n"
            "[transform.T]\nalpha = sqrt2\n"
            "[transform.S]\nalpha = sqrt3\n");
        System s = build_system(cfg);
        CHECK(s.factors.size() == 1);
        CHECK(s.transforms.size() == 2);
        CHECK(s.total_torus_dim() == 1);
    }
    SUBCASE("cat grid") {
        auto cfg = Config::parse_text("[system]\ntype = cat\nq = 101\n[transform.M]\ncat = 1\n");
        System s = build_system(cfg);
        CHECK(std::get<CatFactor>(s.factors[0]).q == 101);
        CHECK(std::get<CatAction>(s.transform("M").actions[0]).power == 1);
    }
    SUBCASE("product with mixed factors") {
        auto cfg = Config::parse_text(
            "[system]\ntype = product\nfactors = torus:1, cat:101, cat:103\n"
            "[transform.T]\nalpha = sqrt2\ncat = 1, 0\n");
        System s = build_system(cfg);
        CHECK(s.factors.size() == 3);
        CHECK(s.has_cat_factor());
        auto& t = s.transform("T");
        CHECK(std::get<CatAction>(t.actions[1]).power == 1);
        CHECK(std::get<CatAction>(t.actions[2]).power == 0);
    }
    SUBCASE("bad factor spec") {
        auto cfg = Config::parse_text("[system]\ntype = product\nfactors = blob:3\n");
        CHECK_THROWS(build_system(cfg));
    }
}

TEST_CASE("observable builders") {
    auto cfg = Config::parse_text(
        "[system]\ntype = torus\ndim = 1\n"
        "[transform.T]\nalpha = sqrt2\n"
        "[observable.f]\nvariant = trigpoly\nterms = -1:1,0; 2:0.5,-0.25\n"
        "[observable.a]\nvariant = arcs\narcs = 0:0.3, 0.5:0.7\n");
    System s = build_system(cfg);
    auto f = build_observable(cfg, s, "f");
    auto& tp = std::get<TrigPoly>(f.parts[0]);
    CHECK(tp.coeff({-1}) == std::complex<double>{1.0, 0.0});
    CHECK(tp.coeff({2}) == std::complex<double>{0.5, -0.25});
    auto a = build_observable(cfg, s, "a");
    CHECK(std::get<ArcUnion>(a.parts[0]).measure() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS(build_observable(cfg, s, "nope"));
}

TEST_CASE("product observables with grid parts") {
    auto cfg = Config::parse_text(
        "[system]\ntype = product\nfactors = torus:1, cat:101\n"
        "[transform.T]\nalpha = sqrt2\ncat = 1\n"
        "[observable.g]\nvariant = product\npart0 = trigpoly 1:1,0\npart1 = char 1 0\n"
        "[observable.h]\nvariant = product\npart0 = ones\npart1 = cochar 1 0\n");
    System s = build_system(cfg);
    auto g = build_observable(cfg, s, "g");
    CHECK(std::get<GridTable>(g.parts[1]).q == 101);
    auto h = build_observable(cfg, s, "h");
    CHECK(std::abs(std::get<GridTable>(h.parts[1]).mean()) < 1e-12);
    CHECK(std::get<TrigPoly>(h.parts[0]).coeff({0}) == std::complex<double>{1.0, 0.0});
}

TEST_CASE("dimension-2 trig terms") {
    auto cfg = Config::parse_text(
        "[system]\ntype = torus\ndim = 2\n"
        "[transform.T]\nalpha = sqrt2, sqrt3\n"
        "[observable.f]\nvariant = trigpoly\nterms = -1 0:0.7,0; 0 -1:0.3,0\n");
    System s = build_system(cfg);
    auto f = build_observable(cfg, s, "f");
    auto& tp = std::get<TrigPoly>(f.parts[0]);
    CHECK(tp.coeff({-1, 0}).real() == 0.7);
    CHECK(tp.coeff({0, -1}).real() == 0.3);
}

TEST_CASE("csv formatting and hashing") {
    CHECK(fmt_real(0.5) == "0.5");
    CHECK(fmt_real(1.0 / 3.0) == "0.33333333333333331");
    CHECK(fnv1a64("abc") != fnv1a64("abd"));
    CHECK(fmt_hash(fnv1a64("abc")).size() == 16);
}

TEST_CASE("split_list handles spacing and empties") {
    auto v = split_list(" a , b ,c ", ',');
    REQUIRE(v.size() == 3);
    CHECK(v[0] == "a");
    CHECK(v[2] == "c");
    CHECK(split_list("", ',').empty());
}

}  // TEST_SUITE
