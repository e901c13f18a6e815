#ifndef REGDIM_LEBESGUE_HPP
#define REGDIM_LEBESGUE_HPP

#include <algorithm>
#include <cmath>

#include "regdim/measure_model.hpp"

namespace regdim {

// Length measure on [0, 1]: the exact 1-regular reference model. Ball masses
// are exact (lo == hi), so it doubles as a fixture for estimator sanity checks.
class LebesgueSegment : public MeasureModel {
public:
    int ambient_dim() const override { return 1; }

    MassInterval ball_mass(const Point& x, double r, double /*tol*/ = 1e-6) const override {
        if (x.dim() != 1) throw std::invalid_argument("point dimension mismatch");
        if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
        const double a = std::max(0.0, x[0] - r);
        const double b = std::min(1.0, x[0] + r);
        return MassInterval::exact(std::max(0.0, b - a));
    }

    std::vector<Point> support_net(double scale) const override {
        if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
        // spacing 2*scale still covers within scale and keeps counting
        // surrogates proportional to covering numbers, not packing-by-spacing
        std::vector<Point> net;
        const double step = 2.0 * scale;
        const long long n = static_cast<long long>(std::ceil(1.0 / step));
        if (n + 1 > (1LL << 22)) throw std::invalid_argument("net scale too fine to enumerate");
        net.reserve(static_cast<std::size_t>(n + 1));
        for (long long k = 0; k < n; ++k) net.push_back(Point{k * step});
        net.push_back(Point{1.0});
        return net;
    }

    std::vector<Point> witnesses() const override {
        return {Point{0.0}, Point{1.0}, Point{0.5}, Point{0.25}, Point{1.0 / 3.0}};
    }

    std::optional<double> log_packing_moment(double r, double q) const override {
        if (!(r > 0.0)) return std::nullopt;
        if (r >= 0.25) {
            // single admissible ball at the midpoint
            return q * std::log(std::min(1.0, 2.0 * r));
        }
        // endpoints (mass r) plus interior centers spaced just over 2r (mass 2r)
        const double s = 2.0 * r * (1.0 + 1e-9);
        const long long n_int = std::max<long long>(
            0, 1 + static_cast<long long>(std::floor((1.0 - 4.004 * r) / s)));
        const double a = std::log(2.0) + q * std::log(r);
        if (n_int == 0) return a;
        const double b = std::log(static_cast<double>(n_int)) + q * std::log(2.0 * r);
        const double m = std::max(a, b);
        return m + std::log(std::exp(a - m) + std::exp(b - m));
    }

    std::optional<double> log_covering_count(const Point& x, double R, double r) const override {
        if (x.dim() != 1 || !(r > 0.0) || !(R > r)) return std::nullopt;
        const double a = std::max(0.0, x[0] - R);
        const double b = std::min(1.0, x[0] + R);
        if (b < a) return 0.0;
        // r-ball cover of [a,b]: centers 2r apart
        const double count = std::max(1.0, std::ceil((b - a) / (2.0 * r)));
        return std::log(count);
    }
};

}  // namespace regdim

#endif
