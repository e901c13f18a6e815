#ifndef REGDIM_MEASURE_MODEL_HPP
#define REGDIM_MEASURE_MODEL_HPP

#include <optional>
#include <stdexcept>
#include <vector>

#include "regdim/mass_interval.hpp"
#include "regdim/point.hpp"

namespace regdim {

// Raised by estimators when no usable (positive-mass) sample survived.
class NoDataError : public std::runtime_error {
public:
    explicit NoDataError(const std::string& what) : std::runtime_error(what) {}
};

// A computable measure: certified open-ball masses plus support sampling.
//
// ball_mass returns an enclosure of mu(B(x, r)) for the OPEN ball. tol is a
// relative-or-absolute width request (width <= tol*hi + tol); models meet it
// where their geometry permits and otherwise return their tightest certified
// enclosure. Shrinking tol never widens the result.
class MeasureModel {
public:
    virtual ~MeasureModel() = default;

    virtual int ambient_dim() const = 0;
    virtual MassInterval ball_mass(const Point& x, double r, double tol = 1e-6) const = 0;

    // Finite scale-net of supp(mu): net points lie in the support, and every
    // support point lies within a bounded multiple of `scale` of a net point
    // (the multiple depends only on the model's cell geometry).
    virtual std::vector<Point> support_net(double scale) const = 0;

    // Candidate extremal points for local-dimension scans; all in supp(mu).
    virtual std::vector<Point> witnesses() const = 0;

    // Optional closed-form scan hooks for grid-aligned models, used by the
    // estimators when geometric enumeration at the requested scale would be
    // infeasible. log of sum over a canonical ~r-separated support family of
    // mass^q, and log of the number of scale-r net elements meeting B(x, R).
    virtual std::optional<double> log_packing_moment(double /*r*/, double /*q*/) const {
        return std::nullopt;
    }
    virtual std::optional<double> log_covering_count(const Point& /*x*/, double /*R*/,
                                                     double /*r*/) const {
        return std::nullopt;
    }
};

}  // namespace regdim

#endif
