#include "regdim/tangent.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace regdim {

namespace {

constexpr double kHalfSide = 1.5;  // ambient square [-3/2, 3/2]^2

double sq(double v) { return v * v; }

// squared distance from the rect to a point, 0 if inside
double rect_min_dist2(double cx, double cy, double hw, double px, double py) {
    const double dx = std::max(std::fabs(cx - px) - hw, 0.0);
    const double dy = std::max(std::fabs(cy - py) - hw, 0.0);
    return dx * dx + dy * dy;
}

// squared distance from the farthest rect corner to a point
double rect_max_dist2(double cx, double cy, double hw, double px, double py) {
    const double dx = std::fabs(cx - px) + hw;
    const double dy = std::fabs(cy - py) + hw;
    return dx * dx + dy * dy;
}

}  // namespace

PushforwardModel::PushforwardModel(const MeasureModel& base, SimilarityMap map,
                                   double scale_factor)
    : base_(&base),
      map_(std::move(map)),
      inv_(invert_similarity(map_)),
      factor_(scale_factor),
      log_factor_(std::log(scale_factor)) {
    if (!(map_.ratio > 0.0) || !std::isfinite(map_.ratio))
        throw std::invalid_argument("pushforward needs a positive similarity ratio");
    if (!(factor_ > 0.0) || !std::isfinite(factor_))
        throw std::invalid_argument("pushforward needs a positive scale factor");
}

MassInterval PushforwardModel::ball_mass(const Point& x, double r, double tol) const {
    return base_->ball_mass(apply_similarity(inv_, x), r / map_.ratio, tol).scaled(factor_);
}

std::vector<Point> PushforwardModel::support_net(double scale) const {
    std::vector<Point> net = base_->support_net(scale / map_.ratio);
    for (Point& p : net) p = apply_similarity(map_, p);
    return net;
}

std::vector<Point> PushforwardModel::witnesses() const {
    std::vector<Point> w = base_->witnesses();
    for (Point& p : w) p = apply_similarity(map_, p);
    return w;
}

std::optional<double> PushforwardModel::log_packing_moment(double r, double q) const {
    const std::optional<double> v = base_->log_packing_moment(r / map_.ratio, q);
    if (!v) return std::nullopt;
    return *v + q * log_factor_;  // sum of (p * m)^q = p^q * sum of m^q
}

std::optional<double> PushforwardModel::log_covering_count(const Point& x, double R,
                                                           double r) const {
    return base_->log_covering_count(apply_similarity(inv_, x), R / map_.ratio, r / map_.ratio);
}

PushforwardModel pushforward(const MeasureModel& base, const SimilarityMap& map,
                             double scale_factor) {
    return PushforwardModel(base, map, scale_factor);
}

LensMeasure::LensMeasure(int i_max, double h, bool restricted)
    : i_max_(i_max), h_(h), restricted_(restricted) {
    if (i_max < 1 || i_max > 20)
        throw std::invalid_argument("lens count must lie in 1..20");
    const double r_min = std::ldexp(1.0, -i_max);
    if (!(h > 0.0) || !std::isfinite(h) || h > r_min * r_min / 4.0)
        throw std::invalid_argument(
            "quadrature cell too coarse: need h <= (finest lens radius)^2 / 4");
    cx_.reserve(i_max_);
    cy_.reserve(i_max_);
    r_.reserve(i_max_);
    for (int i = 1; i <= i_max_; ++i) {
        const double t = std::numbers::pi * (1.0 - 1.0 / std::sqrt(static_cast<double>(i)));
        cx_.push_back(std::cos(t));
        cy_.push_back(std::sin(t));
        r_.push_back(std::ldexp(1.0, -i));
    }
}

Point LensMeasure::lens_center(int i) const {
    if (i < 1 || i > i_max_) throw std::invalid_argument("lens index out of range");
    return Point{cx_[i - 1], cy_[i - 1]};
}

double LensMeasure::lens_radius(int i) const {
    if (i < 1 || i > i_max_) throw std::invalid_argument("lens index out of range");
    return r_[i - 1];
}

bool LensMeasure::point_in_region(const Point& y) const {
    if (y.dim() != 2) throw std::invalid_argument("lens measure lives in the plane");
    const double d2 = y[0] * y[0] + y[1] * y[1];
    if (restricted_) {
        if (d2 > 1.0) return false;
    } else {
        if (std::fabs(y[0]) > kHalfSide || std::fabs(y[1]) > kHalfSide) return false;
    }
    for (int i = 0; i < i_max_; ++i) {
        const double shell = 1.0 - r_[i] * r_[i];
        if (sq(y[0] - cx_[i]) + sq(y[1] - cy_[i]) < r_[i] * r_[i] && d2 < shell * shell)
            return false;  // interior of a removed lens
    }
    return true;
}

// Depth-first cell classification. Each constraint, once decided for a cell,
// stays decided for its children: the ball and domain carry an active flag,
// lenses a bitmask. Cells with everything decided are interior and counted
// exactly; cells still straddling something at size <= h go to the upper
// endpoint only.
void LensMeasure::accumulate(const Rect& cell, double bx, double by, double rho2,
                             bool ball_active, bool domain_active, std::uint32_t lenses,
                             long double& area_in, long double& area_bnd) const {
    if (ball_active) {
        if (rect_min_dist2(cell.cx, cell.cy, cell.hw, bx, by) >= rho2) return;
        if (rect_max_dist2(cell.cx, cell.cy, cell.hw, bx, by) <= rho2) ball_active = false;
    }
    if (domain_active) {
        if (restricted_) {
            const double lo2 = rect_min_dist2(cell.cx, cell.cy, cell.hw, 0.0, 0.0);
            if (lo2 >= 1.0) return;
            if (rect_max_dist2(cell.cx, cell.cy, cell.hw, 0.0, 0.0) <= 1.0)
                domain_active = false;
        } else {
            const double ax = std::fabs(cell.cx), ay = std::fabs(cell.cy);
            if (ax - cell.hw >= kHalfSide || ay - cell.hw >= kHalfSide) return;
            if (ax + cell.hw <= kHalfSide && ay + cell.hw <= kHalfSide) domain_active = false;
        }
    }
    std::uint32_t child_mask = 0;
    for (std::uint32_t m = lenses; m != 0; m &= m - 1) {
        const int i = __builtin_ctz(m);
        const double r2 = r_[i] * r_[i];
        const double shell2 = sq(1.0 - r_[i] * r_[i]);
        const double near2 = rect_min_dist2(cell.cx, cell.cy, cell.hw, cx_[i], cy_[i]);
        if (near2 >= r2) continue;  // cell clear of this lens
        const double o_near2 = rect_min_dist2(cell.cx, cell.cy, cell.hw, 0.0, 0.0);
        if (o_near2 >= shell2) continue;  // cell outside the removal shell
        if (rect_max_dist2(cell.cx, cell.cy, cell.hw, cx_[i], cy_[i]) <= r2 &&
            rect_max_dist2(cell.cx, cell.cy, cell.hw, 0.0, 0.0) <= shell2)
            return;  // cell swallowed by the removed lens
        child_mask |= 1u << i;
    }
    const double side = 2.0 * cell.hw;
    if (!ball_active && !domain_active && child_mask == 0) {
        area_in += static_cast<long double>(side) * side;
        return;
    }
    if (side <= h_) {
        area_bnd += static_cast<long double>(side) * side;
        return;
    }
    const double qh = 0.5 * cell.hw;
    accumulate({cell.cx - qh, cell.cy - qh, qh}, bx, by, rho2, ball_active, domain_active,
               child_mask, area_in, area_bnd);
    accumulate({cell.cx + qh, cell.cy - qh, qh}, bx, by, rho2, ball_active, domain_active,
               child_mask, area_in, area_bnd);
    accumulate({cell.cx - qh, cell.cy + qh, qh}, bx, by, rho2, ball_active, domain_active,
               child_mask, area_in, area_bnd);
    accumulate({cell.cx + qh, cell.cy + qh, qh}, bx, by, rho2, ball_active, domain_active,
               child_mask, area_in, area_bnd);
}

MassInterval LensMeasure::ball_mass(const Point& x, double r, double tol) const {
    (void)tol;  // resolution pinned by the construction-time cell size
    if (x.dim() != 2) throw std::invalid_argument("lens measure lives in the plane");
    if (!(r > 0.0) || !std::isfinite(r))
        throw std::invalid_argument("ball radius must be positive");
    // quick rejects keep far queries cheap
    if (restricted_) {
        if (std::sqrt(x[0] * x[0] + x[1] * x[1]) - r >= 1.0) return MassInterval::zero();
    } else {
        if (std::fabs(x[0]) - r >= kHalfSide || std::fabs(x[1]) - r >= kHalfSide)
            return MassInterval::zero();
    }
    std::uint32_t mask = 0;
    for (int i = 0; i < i_max_; ++i) {
        const double reach = r + r_[i];
        if (sq(x[0] - cx_[i]) + sq(x[1] - cy_[i]) < reach * reach) mask |= 1u << i;
    }
    long double area_in = 0.0L, area_bnd = 0.0L;
    accumulate({x[0], x[1], r}, x[0], x[1], r * r, true, true, mask, area_in, area_bnd);
    // pad for summation rounding, then clamp: the measure is dominated by Lebesgue
    double lo = static_cast<double>(area_in) * (1.0 - 4e-13);
    double hi = static_cast<double>(area_in + area_bnd) * (1.0 + 4e-13);
    const double cap = std::numbers::pi * r * r * (1.0 + 4e-16);
    if (hi > cap) hi = cap;
    if (!(hi > 0.0)) return MassInterval::zero();
    if (lo < 0.0) lo = 0.0;
    return MassInterval(lo, hi);
}

std::vector<Point> LensMeasure::support_net(double scale) const {
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw std::invalid_argument("support_net needs a positive scale");
    const double n_cells = std::ceil(2.0 * kHalfSide / scale);
    if (n_cells * n_cells > 4194304.0)
        throw std::invalid_argument("support_net scale too fine to enumerate");
    const int n = static_cast<int>(n_cells);
    std::vector<Point> net;
    for (int gx = 0; gx <= n; ++gx) {
        for (int gy = 0; gy <= n; ++gy) {
            const Point p{-kHalfSide + gx * scale, -kHalfSide + gy * scale};
            if (std::fabs(p[0]) > kHalfSide || std::fabs(p[1]) > kHalfSide) continue;
            if (point_in_region(p)) net.push_back(p);
        }
    }
    return net;
}

std::vector<Point> LensMeasure::witnesses() const {
    std::vector<Point> w;
    w.push_back(Point{0.0, 0.0});
    for (int i = 1; i <= i_max_; ++i) w.push_back(lens_center(i));
    if (!restricted_) w.push_back(Point{1.4, 0.0});
    return w;
}

LensMeasure build_lens_measure(int i_max, double h, bool restricted) {
    return LensMeasure(i_max, h, restricted);
}

std::vector<std::pair<int, double>> nondoubling_ratios(const LensMeasure& lens,
                                                       const std::vector<int>& i_list) {
    if (!lens.restricted())
        throw std::invalid_argument(
            "doubling blow-up needs the restricted model: the full region is doubling");
    std::vector<std::pair<int, double>> out;
    out.reserve(i_list.size());
    for (int i : i_list) {
        const Point c = lens.lens_center(i);
        const double r = lens.lens_radius(i);
        const MassInterval big = lens.ball_mass(c, 2.0 * r);
        const MassInterval small = lens.ball_mass(c, r);
        out.emplace_back(i, big.lo() / small.hi());
    }
    return out;
}

}  // namespace regdim
