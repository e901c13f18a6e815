#include <cmath>
#include <vector>

#include "doctest.h"
#include "regdim/self_similar.hpp"

using namespace regdim;

namespace {

SelfSimilarSystem cantor(double p0 = 0.5) {
    std::vector<SimilarityMap> maps = {make_similarity_1d(1.0 / 3.0, 0.0),
                                       make_similarity_1d(1.0 / 3.0, 2.0 / 3.0)};
    return build_selfsimilar(std::move(maps), std::vector<double>{p0, 1.0 - p0});
}

SelfSimilarSystem cantor_exact() {
    std::vector<SimilarityMap> maps = {make_similarity_1d(1.0 / 3.0, 0.0),
                                       make_similarity_1d(1.0 / 3.0, 2.0 / 3.0)};
    return build_selfsimilar(std::move(maps), std::vector<Rational>{{1, 2}, {1, 2}});
}

}  // namespace

TEST_CASE("system construction validates inputs") {
    auto maps = [] {
        return std::vector<SimilarityMap>{make_similarity_1d(0.5, 0.0),
                                          make_similarity_1d(0.25, 0.75)};
    };
    CHECK_THROWS_AS(build_selfsimilar({}, std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(build_selfsimilar(maps(), std::vector<double>{0.5}), std::invalid_argument);
    CHECK_THROWS_AS(build_selfsimilar(maps(), std::vector<double>{0.6, 0.6}),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_selfsimilar(maps(), std::vector<double>{1.2, -0.2}),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_selfsimilar(maps(), std::vector<Rational>{{1, 3}, {1, 3}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        build_selfsimilar({make_similarity_1d(1.5, 0.0)}, std::vector<double>{1.0}),
        std::invalid_argument);
}

TEST_CASE("middle-thirds hull is the unit interval") {
    auto sys = cantor();
    CHECK(sys.hull_center[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sys.hull_radius == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(sys.diameter() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("separation certificate for middle thirds") {
    auto sep = check_ssc(cantor());
    REQUIRE(sep.status == SeparationStatus::Certified);
    CHECK(sep.depth_used == 1);
    CHECK(sep.delta > 0.33);
    CHECK(sep.delta <= 1.0 / 3.0 + 1e-6);
}

TEST_CASE("touching pieces stay uncertified and shared fixed points are violations") {
    std::vector<SimilarityMap> touching = {make_similarity_1d(0.5, 0.0),
                                           make_similarity_1d(0.5, 0.5)};
    auto sys = build_selfsimilar(touching, std::vector<double>{0.5, 0.5});
    CHECK(check_ssc(sys, 6).status == SeparationStatus::Unknown);

    std::vector<SimilarityMap> shared = {make_similarity_1d(0.5, 0.0),
                                         make_similarity_1d(1.0 / 3.0, 0.0)};
    auto sys2 = build_selfsimilar(shared, std::vector<double>{0.5, 0.5});
    CHECK(check_ssc(sys2).status == SeparationStatus::Violated);

    SelfSimilarModel model(std::move(sys));
    CHECK_THROWS_AS(model.ball_mass(Point{0.25}, 0.01), std::domain_error);
}

TEST_CASE("codes map to exact points") {
    auto sys = cantor();
    CHECK(point_from_code(sys, {}, {0})[0] == 0.0);
    CHECK(point_from_code(sys, {}, {1})[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(point_from_code(sys, {0}, {1})[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(point_from_code(sys, {1}, {0})[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(point_from_code(sys, {}, {0, 1})[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK_THROWS_AS(point_from_code(sys, {}, {}), std::invalid_argument);
    CHECK_THROWS_AS(point_from_code(sys, {2}, {0}), std::invalid_argument);
}

TEST_CASE("cylinder masses are exact rational products") {
    auto sys = cantor_exact();
    CHECK(cylinder_mass_exact(sys, {0, 1, 0}) == Rational(1, 8));
    CHECK(cylinder_mass_exact(sys, {}) == Rational(1));
    auto sys2 = build_selfsimilar(
        {make_similarity_1d(1.0 / 3.0, 0.0), make_similarity_1d(1.0 / 3.0, 2.0 / 3.0)},
        std::vector<Rational>{{7, 10}, {3, 10}});
    CHECK(cylinder_mass_exact(sys2, {0, 0, 1}) == Rational(7 * 7 * 3, 1000));
}

TEST_CASE("ball masses bracket exact cylinder values") {
    auto sys = cantor();
    auto sep = check_ssc(sys);
    // B(0, 3^-k) meets exactly the left depth-k cylinder: mass 2^-k
    for (int k : {1, 3, 6, 10}) {
        const double r = std::pow(3.0, -k);
        MassInterval m = ball_mass_ss(sys, sep, Point{0.0}, r, 1e-6);
        const double exact = std::pow(2.0, -k);
        CHECK(m.contains(exact));
        CHECK(m.width() <= 1e-4 * exact);
    }
    // a ball engulfing everything
    MassInterval whole = ball_mass_ss(sys, sep, Point{0.5}, 2.0);
    CHECK(whole.lo() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(whole.hi() == 1.0);
    // a ball inside the central gap
    CHECK(ball_mass_ss(sys, sep, Point{0.5}, 0.1).is_zero());
}

TEST_CASE("interval tightens monotonically in tol") {
    auto sys = cantor(0.7);
    auto sep = check_ssc(sys);
    const Point x{2.0 / 3.0};
    const double r = 0.02;
    MassInterval coarse = ball_mass_ss(sys, sep, x, r, 1e-2);
    MassInterval fine = ball_mass_ss(sys, sep, x, r, 1e-7);
    CHECK(coarse.lo() <= fine.lo() + 1e-18);
    CHECK(fine.hi() <= coarse.hi() + 1e-18);
    CHECK(fine.width() <= coarse.width());
    CHECK(fine.width() <= 1e-5 * fine.hi());
}

TEST_CASE("regularity dimension closed forms") {
    // uniform middle thirds: log 2 / log 3
    CHECK(regularity_dimension(cantor()) == doctest::Approx(0.6309297535714574).epsilon(1e-12));
    // weighted 0.7/0.3: ln(10/3)/ln 3
    CHECK(regularity_dimension(cantor(0.7)) ==
          doctest::Approx(1.0959032742893846).epsilon(1e-12));
    // ratios (1/2, 1/4) with natural weights solve u + u^2 = 1: both branch
    // exponents equal the Moran value 0.6942419136306172
    const double u = (std::sqrt(5.0) - 1.0) / 2.0;
    auto sys = build_selfsimilar(
        {make_similarity_1d(0.5, 0.0), make_similarity_1d(0.25, 0.75)},
        std::vector<double>{u, u * u});
    CHECK(regularity_dimension(sys) == doctest::Approx(0.6942419136306172).epsilon(1e-10));
}

TEST_CASE("support net is a genuine scale net") {
    SelfSimilarModel model(cantor());
    const double scale = model.system().diameter() * std::pow(3.0, -5);
    auto net = model.support_net(scale);
    CHECK(net.size() == 32);  // 2^5 stopping cylinders
    for (const auto& w : model.witnesses()) {
        double best = 1e300;
        for (const auto& p : net) best = std::min(best, dist(p, w));
        CHECK(best <= scale);
    }
}

TEST_CASE("witness list contains the canonical extremal points") {
    SelfSimilarModel model(cantor());
    auto has = [&](double v) {
        for (const auto& w : model.witnesses())
            if (std::fabs(w[0] - v) < 1e-12) return true;
        return false;
    };
    CHECK(has(0.0));
    CHECK(has(1.0));
    CHECK(has(1.0 / 3.0));
    CHECK(has(2.0 / 3.0));
    CHECK(has(0.25));
}

TEST_CASE("packing moments follow the branching recursion exactly") {
    SelfSimilarModel model(cantor());
    const double diam = model.system().diameter();
    // at r slightly above diam*3^-k the stopping family is the 2^k words of
    // length k, each of mass 2^-k
    for (int k : {2, 5, 9}) {
        const double r = diam * std::pow(3.0, -k) * 1.01;
        for (double q : {2.0, 0.0, -1.0, -20.0}) {
            auto lm = model.log_packing_moment(r, q);
            REQUIRE(lm.has_value());
            CHECK(*lm == doctest::Approx(k * (1.0 - q) * std::log(2.0)).epsilon(1e-10));
        }
        auto unit = model.log_packing_moment(r, 1.0);
        REQUIRE(unit.has_value());
        CHECK(std::fabs(*unit) <= 1e-12);  // partition of unity
    }
    // r at or above the diameter: single root cylinder
    CHECK(model.log_packing_moment(diam * 2.0, 3.0) == 0.0);
}

TEST_CASE("covering counts match the cylinder census") {
    SelfSimilarModel model(cantor());
    const double diam = model.system().diameter();
    // stopping scale diam*3^-k; window B(0, 1.5*3^-j) captures the left
    // depth-j cylinder and nothing else: 2^(k-j) stopping cylinders
    const int k = 12;
    const double r = diam * std::pow(3.0, -k) * 1.01;
    for (int j : {2, 4, 7}) {
        const double R = 1.5 * std::pow(3.0, -j);
        auto lc = model.log_covering_count(Point{0.0}, R, r);
        REQUIRE(lc.has_value());
        CHECK(*lc == doctest::Approx((k - j) * std::log(2.0)).epsilon(1e-9));
    }
}

TEST_CASE("deep moment requests fall back to nullopt instead of stalling") {
    // weak contractions make the stopping lattice explode long before the
    // radius leaves double range; the hook must decline, not stall
    auto sys = build_selfsimilar(
        {make_similarity_1d(0.9, 0.0), make_similarity_1d(0.9, 0.1)},
        std::vector<double>{0.5, 0.5});
    SelfSimilarModel model(std::move(sys), 3);
    CHECK_FALSE(model.log_packing_moment(1e-120, 2.0).has_value());
    CHECK(model.log_packing_moment(1e-3, 2.0).has_value());
}
