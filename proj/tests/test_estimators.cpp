#include <cmath>
#include <vector>

#include "doctest.h"
#include "regdim/estimators.hpp"
#include "regdim/lebesgue.hpp"
#include "regdim/self_similar.hpp"

using namespace regdim;

namespace {

SelfSimilarSystem cantor(double p0 = 0.5) {
    std::vector<SimilarityMap> maps = {make_similarity_1d(1.0 / 3.0, 0.0),
                                       make_similarity_1d(1.0 / 3.0, 2.0 / 3.0)};
    return build_selfsimilar(std::move(maps), std::vector<double>{p0, 1.0 - p0});
}

const ScaleGrid kDyadic{2.0, 2, 26, 8, 24};
const ScaleGrid kTriadic{3.0, 2, 26, 8, 20};

}  // namespace

TEST_CASE("upper regularity: unit segment is 1-regular") {
    LebesgueSegment leb;
    auto est = estimate_upper_regularity(leb, kDyadic, leb.witnesses());
    CHECK(est.value == doctest::Approx(1.0).epsilon(0.05));
    CHECK(est.conservative);
    CHECK(est.skipped == 0);
    // witness reproduces the reported value
    const double num = leb.ball_mass(est.witness_x, est.witness_R).log_lo();
    const double den = leb.ball_mass(est.witness_x, est.witness_r).log_hi();
    CHECK((num - den) / std::log(est.witness_R / est.witness_r) ==
          doctest::Approx(est.value).epsilon(1e-9));
    // value equals the max over the gap curve
    double curve_max = -1e300;
    for (auto& [g, v] : est.gap_curve) curve_max = std::max(curve_max, v);
    CHECK(est.value == curve_max);
}

TEST_CASE("upper regularity: weighted middle thirds hits the branch formula") {
    SelfSimilarModel model(cantor(0.7));
    auto est = estimate_upper_regularity(model, kTriadic, model.witnesses());
    CHECK(est.value == doctest::Approx(1.0959032742893846).epsilon(0.05));
    const double num = model.ball_mass(est.witness_x, est.witness_R).log_lo();
    const double den = model.ball_mass(est.witness_x, est.witness_r).log_hi();
    CHECK((num - den) / std::log(est.witness_R / est.witness_r) ==
          doctest::Approx(est.value).epsilon(1e-9));
}

TEST_CASE("upper regularity: enlarging samples or grid never decreases the value") {
    SelfSimilarModel model(cantor(0.7));
    const auto wits = model.witnesses();
    std::vector<Point> few(wits.begin(), wits.begin() + 2);
    const double v_few = estimate_upper_regularity(model, kTriadic, few).value;
    const double v_all = estimate_upper_regularity(model, kTriadic, wits).value;
    CHECK(v_few <= v_all + 1e-15);

    ScaleGrid narrow{3.0, 2, 20, 8, 12};
    ScaleGrid wide{3.0, 2, 30, 8, 12};
    const double v_narrow = estimate_upper_regularity(model, narrow, wits).value;
    const double v_wide = estimate_upper_regularity(model, wide, wits).value;
    CHECK(v_narrow <= v_wide + 1e-15);
}

TEST_CASE("upper regularity: off-support samples are tallied, not fatal") {
    SelfSimilarModel model(cantor());
    std::vector<Point> pts = model.witnesses();
    pts.push_back(Point{0.5});  // middle gap: zero mass at every scale
    auto est = estimate_upper_regularity(model, kTriadic, pts);
    CHECK(est.skipped > 0);
    CHECK(est.value == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(0.05));
    CHECK_THROWS_AS(estimate_upper_regularity(model, kTriadic, {Point{0.5}}), NoDataError);
    CHECK_THROWS_AS(estimate_upper_regularity(model, kTriadic, {}), std::invalid_argument);
}

TEST_CASE("upper local dimension at canonical points") {
    LebesgueSegment leb;
    CHECK(estimate_local_dim_upper(leb, Point{0.5}, kDyadic) ==
          doctest::Approx(1.0).epsilon(0.05));

    SelfSimilarModel model(cantor(0.7));
    ScaleGrid deep{3.0, 2, 26, 8, 20};
    // fixed point of the p=0.3 branch carries the largest local exponent
    CHECK(estimate_local_dim_upper(model, Point{1.0}, deep) ==
          doctest::Approx(1.0959032742893846).epsilon(0.05));
    // p=0.7 branch fixed point: log 0.7 / log(1/3)
    CHECK(estimate_local_dim_upper(model, Point{0.0}, deep) ==
          doctest::Approx(std::log(0.7) / std::log(1.0 / 3.0)).epsilon(0.05));
    CHECK_THROWS_AS(estimate_local_dim_upper(model, Point{0.5}, deep), NoDataError);
}

TEST_CASE("doubling constant on exact and cylinder models") {
    LebesgueSegment leb;
    CHECK(doubling_constant(leb, 0.5, kDyadic, leb.witnesses()) ==
          doctest::Approx(2.0).epsilon(0.05));

    SelfSimilarModel model(cantor(0.7));
    const double v = doubling_constant(model, 1.0 / 3.0, kTriadic, model.witnesses());
    CHECK(std::log(v) / std::log(3.0) >= 1.0959032742893846 - 0.05);

    // monotonicity of measure: the ratio can never dip below 1
    for (double th : {0.9, 0.5, 0.2})
        CHECK(doubling_constant(model, th, kTriadic, model.witnesses()) >= 1.0 - 1e-12);
    CHECK_THROWS_AS(doubling_constant(leb, 1.5, kDyadic, leb.witnesses()),
                    std::invalid_argument);
}

TEST_CASE("packing sums: counts, unit normalization, inverse moments") {
    LebesgueSegment leb;
    const double r = std::pow(2.0, -6);
    const double count = packing_sum(leb, r, 0.0);
    CHECK(count >= 1.0 / (4.0 * r) - 1e-9);
    CHECK(count <= 1.0 / (2.0 * r) + 1.0);

    SelfSimilarModel model(cantor(0.7));
    CHECK(packing_sum(leb, r, 1.0) <= 1.0 + 1e-9);
    CHECK(packing_sum(model, std::pow(3.0, -6), 1.0, 3.0) <= 1.0 + 1e-9);

    // every level-6 cylinder contributes its inverse mass
    const double oracle = 11659.615572447306;  // (10/7 + 10/3)^6
    const double v = packing_sum(model, std::pow(3.0, -6), -1.0, 3.0);
    CHECK(v >= oracle * (1.0 - 1e-5));
    CHECK(v <= oracle * (1.0 + 1e-4));
}

TEST_CASE("tau fits recover the moment scaling") {
    LebesgueSegment leb;
    auto t0 = estimate_tau(leb, 0.0, kDyadic);
    CHECK(t0.tau_hat == doctest::Approx(-1.0).epsilon(0.1));
    auto t1 = estimate_tau(leb, 1.0, kDyadic);
    CHECK(std::fabs(t1.tau_hat) <= 0.1);

    SelfSimilarModel model(cantor());
    auto t2 = estimate_tau(model, 2.0, kTriadic);
    CHECK(t2.tau_hat == doctest::Approx(0.6309297535714574).epsilon(0.1));
    CHECK(t2.residual <= 0.05);
    auto tz = estimate_tau(model, 0.0, kTriadic);
    CHECK(tz.tau_hat == doctest::Approx(-0.6309297535714574).epsilon(0.1));

    CHECK_THROWS_AS(estimate_tau(leb, 0.0, ScaleGrid(2.0, 2, 3, 1, 1)),
                    std::invalid_argument);
}

TEST_CASE("geometric packing path agrees with the closed-form moments") {
    // strip the hook by wrapping the model
    struct NoHook : MeasureModel {
        SelfSimilarModel inner{cantor()};
        int ambient_dim() const override { return inner.ambient_dim(); }
        MassInterval ball_mass(const Point& x, double r, double tol) const override {
            return inner.ball_mass(x, r, tol);
        }
        std::vector<Point> support_net(double s) const override {
            return inner.support_net(s);
        }
        std::vector<Point> witnesses() const override { return inner.witnesses(); }
    } plain;
    ScaleGrid coarse{3.0, 2, 9, 2, 4};
    for (double q : {2.0, 0.0, -1.0}) {
        auto geo = estimate_tau(plain, q, coarse);
        auto hook = estimate_tau(plain.inner, q, coarse);
        CHECK(geo.tau_hat == doctest::Approx(hook.tau_hat).epsilon(0.12));
    }
}

TEST_CASE("T estimates from the most negative q") {
    SelfSimilarModel model(cantor(0.7));
    auto spec = estimate_T(model, {-2.0, -10.0, -20.0}, kTriadic);
    CHECK(spec.T_hat == doctest::Approx(1.0959032742893846).epsilon(0.1));
    CHECK(spec.points.size() == 3);

    LebesgueSegment leb;
    auto ls = estimate_T(leb, {-20.0}, kDyadic);
    CHECK(ls.T_hat == doctest::Approx(1.0).epsilon(0.1));

    CHECK_THROWS_AS(estimate_T(model, {-2.0, -5.0}, kTriadic), std::invalid_argument);
    CHECK_THROWS_AS(estimate_T(model, {}, kTriadic), std::invalid_argument);
}

TEST_CASE("assouad estimates of the supports") {
    LebesgueSegment leb;
    CHECK(estimate_assouad_support(leb, kDyadic, leb.witnesses()) ==
          doctest::Approx(1.0).epsilon(0.1));
    SelfSimilarModel model(cantor(0.7));
    ScaleGrid g3{3.0, 2, 30, 14, 20};
    CHECK(estimate_assouad_support(model, g3, model.witnesses()) ==
          doctest::Approx(0.6309297535714574).epsilon(0.1));
}

TEST_CASE("dimension chain holds on the gallery endpoints") {
    LebesgueSegment leb;
    auto rep = verify_dimension_chain(leb, kDyadic, leb.witnesses());
    CHECK(rep.violations.empty());
    CHECK(rep.sup_local_hat == doctest::Approx(1.0).epsilon(0.1));
    CHECK(rep.T_hat == doctest::Approx(1.0).epsilon(0.1));
    CHECK(rep.dimreg_hat == doctest::Approx(1.0).epsilon(0.1));
    CHECK(rep.box_support_hat == doctest::Approx(1.0).epsilon(0.1));
    CHECK(rep.assouad_support_hat == doctest::Approx(1.0).epsilon(0.1));

    SelfSimilarModel model(cantor(0.7));
    ScaleGrid g3{3.0, 2, 26, 14, 22};
    auto rc = verify_dimension_chain(model, g3, model.witnesses());
    CHECK(rc.violations.empty());
    CHECK(rc.sup_local_hat == doctest::Approx(1.0959032742893846).epsilon(0.05));
    CHECK(rc.T_hat == doctest::Approx(1.0959032742893846).epsilon(0.1));
    CHECK(rc.dimreg_hat == doctest::Approx(1.0959032742893846).epsilon(0.05));
    CHECK(rc.box_support_hat == doctest::Approx(0.6309297535714574).epsilon(0.1));
    CHECK(rc.assouad_support_hat >= 0.6309297535714574 - 0.1);
    CHECK(rc.assouad_support_hat <= 0.6309297535714574 + 0.1);
}

TEST_CASE("estimates are identical across thread counts") {
    SelfSimilarModel model(cantor(0.7));
    EstimatorOptions t1, t4;
    t1.threads = 1;
    t4.threads = 4;
    auto a = estimate_upper_regularity(model, kTriadic, model.witnesses(), 1e-6, t1);
    auto b = estimate_upper_regularity(model, kTriadic, model.witnesses(), 1e-6, t4);
    CHECK(a.value == b.value);
    CHECK(a.witness_R == b.witness_R);
    CHECK(a.witness_r == b.witness_r);
    CHECK(a.witness_x == b.witness_x);
    CHECK(a.skipped == b.skipped);
    CHECK(estimate_assouad_support(model, kTriadic, model.witnesses(), t1) ==
          estimate_assouad_support(model, kTriadic, model.witnesses(), t4));
}
