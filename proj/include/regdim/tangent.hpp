#ifndef REGDIM_TANGENT_HPP
#define REGDIM_TANGENT_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "regdim/measure_model.hpp"
#include "regdim/similarity.hpp"

namespace regdim {

// Rescaled renormalized copy of a base measure: nu(A) = p * mu(T^-1 A).
// Every query forwards to the base exactly: ball_mass(x, rho) is the base
// enclosure at (T^-1 x, rho / ratio(T)) with both endpoints scaled by p, so
// estimator readings of the copy reproduce base readings verbatim under a
// correspondingly rescaled grid. The base must outlive the model.
class PushforwardModel final : public MeasureModel {
  public:
    PushforwardModel(const MeasureModel& base, SimilarityMap map, double scale_factor);

    int ambient_dim() const override { return base_->ambient_dim(); }
    MassInterval ball_mass(const Point& x, double r, double tol = 1e-6) const override;
    std::vector<Point> support_net(double scale) const override;
    std::vector<Point> witnesses() const override;
    std::optional<double> log_packing_moment(double r, double q) const override;
    std::optional<double> log_covering_count(const Point& x, double R, double r) const override;

    const MeasureModel& base() const { return *base_; }
    const SimilarityMap& map() const { return map_; }
    double scale_factor() const { return factor_; }

  private:
    const MeasureModel* base_;
    SimilarityMap map_;
    SimilarityMap inv_;
    double factor_;
    double log_factor_;
};

PushforwardModel pushforward(const MeasureModel& base, const SimilarityMap& map,
                             double scale_factor);

// Planar area measure on [-3/2, 3/2]^2 with a sequence of lens-shaped bites
// removed near the unit circle: for i = 1..i_max a ball B(x_i, r_i) is
// centered at angle pi(1 - i^-1/2) on the circle with r_i = 2^-i, and the
// part of it deeper than r_i^2 inside the circle (B(x_i, r_i) intersected
// with B(0, 1 - r_i^2)) is discarded. The restricted variant keeps only
// B(0, 1). Ball masses are certified by dyadic quadrature: cells are
// classified inside/outside/straddling down to size h, straddling cells
// contribute only to the upper endpoint, so the enclosure width is bounded
// by (straddling cell count) * h^2.
class LensMeasure final : public MeasureModel {
  public:
    LensMeasure(int i_max, double h, bool restricted);

    int ambient_dim() const override { return 2; }
    MassInterval ball_mass(const Point& x, double r, double tol = 1e-6) const override;
    std::vector<Point> support_net(double scale) const override;
    std::vector<Point> witnesses() const override;

    int lens_count() const { return i_max_; }
    double cell_size() const { return h_; }
    bool restricted() const { return restricted_; }
    Point lens_center(int i) const;
    double lens_radius(int i) const;

    // true if y avoids every removed lens (and B(0,1) when restricted)
    bool point_in_region(const Point& y) const;

  private:
    struct Rect {
        double cx, cy, hw;
    };
    void accumulate(const Rect& cell, double bx, double by, double rho2, bool ball_active,
                    bool domain_active, std::uint32_t lenses, long double& area_in,
                    long double& area_bnd) const;

    int i_max_;
    double h_;
    bool restricted_;
    std::vector<double> cx_;
    std::vector<double> cy_;
    std::vector<double> r_;
};

LensMeasure build_lens_measure(int i_max, double h, bool restricted);

// Certified lower bounds lo(B(x_i, 2 r_i)) / hi(B(x_i, r_i)) of the doubling
// ratios at the lens centers; restricted models only. Grows like pi/(4 r_i).
std::vector<std::pair<int, double>> nondoubling_ratios(const LensMeasure& lens,
                                                       const std::vector<int>& i_list);

}  // namespace regdim

#endif  // REGDIM_TANGENT_HPP
