#ifndef REGDIM_ESTIMATORS_HPP
#define REGDIM_ESTIMATORS_HPP

#include <string>
#include <utility>
#include <vector>

#include "regdim/measure_model.hpp"
#include "regdim/scale_grid.hpp"

namespace regdim {

struct EstimatorOptions {
    int threads = 1;
    // reserved for randomized sampling; all default sampling is deterministic
    unsigned long long seed = 0;
    double mass_tol = 1e-6;
};

struct DimEstimate {
    double value = 0.0;
    bool infinite = false;
    Point witness_x;
    double witness_r = 0.0;
    double witness_R = 0.0;
    // per gap g: sup over positions and radius pairs of the ratio exponent
    std::vector<std::pair<int, double>> gap_curve;
    bool conservative = true;  // interval-pessimistic ends were used
    long long skipped = 0;     // triples dropped for zero-mass interval ends
};

// sup over samples x and pairs (R = b^-i, r = b^-(i+g)) of
// log(ballmass(x,R).lo / ballmass(x,r).hi) / log(R/r).
DimEstimate estimate_upper_regularity(const MeasureModel& model, const ScaleGrid& grid,
                                      const std::vector<Point>& sample_points, double tol = 1e-6,
                                      const EstimatorOptions& opts = {});

// max over the smallest quartile of grid radii of log(ballmass(x,r).hi)/log r.
double estimate_local_dim_upper(const MeasureModel& model, const Point& x, const ScaleGrid& grid,
                                const EstimatorOptions& opts = {});

// observed sup over (x, R) of mass(x,R).hi / mass(x,theta R).lo; a lower
// bound for the true C(theta). log_doubling_constant returns its log (usable
// when the ratio overflows doubles).
double doubling_constant(const MeasureModel& model, double theta, const ScaleGrid& grid,
                         const std::vector<Point>& sample_points,
                         const EstimatorOptions& opts = {});
double log_doubling_constant(const MeasureModel& model, double theta, const ScaleGrid& grid,
                             const std::vector<Point>& sample_points,
                             const EstimatorOptions& opts = {});

// Greedy maximal 2r-separated packing from support_net(r * net_scale_factor);
// sum of mass^q using the interval end that understates each term, so the
// result is a certified lower bound of the packing supremum.
double packing_sum(const MeasureModel& model, double r, double q, double net_scale_factor = 1.0,
                   const EstimatorOptions& opts = {});

struct TauFit {
    double tau_hat = 0.0;
    double residual = 0.0;  // rms deviation of the least-squares fit
};

// least-squares slope of log M_r^q against log r over the grid radii;
// uses the model's closed-form moment hook when it covers every radius.
TauFit estimate_tau(const MeasureModel& model, double q, const ScaleGrid& grid,
                    const EstimatorOptions& opts = {});

struct LqSpectrumEstimate {
    struct Row {
        double q = 0.0;
        double tau_hat = 0.0;
        double fit_residual = 0.0;
    };
    std::vector<Row> points;
    double T_hat = 0.0;  // tau_hat(q*)/q* at the most negative q*
};

LqSpectrumEstimate estimate_T(const MeasureModel& model, const std::vector<double>& q_list,
                              const ScaleGrid& grid, const EstimatorOptions& opts = {});

// sup over samples and pairs with gap >= gap_min of log N(x,R,r) / log(R/r),
// where N counts scale-r cover elements of supp meeting B(x,R).
double estimate_assouad_support(const MeasureModel& model, const ScaleGrid& grid,
                                const std::vector<Point>& sample_points,
                                const EstimatorOptions& opts = {});

inline constexpr double kChainTol = 0.1;

struct ChainReport {
    double sup_local_hat = 0.0;
    double T_hat = 0.0;
    double dimreg_hat = 0.0;
    double box_support_hat = 0.0;
    double assouad_support_hat = 0.0;
    struct Violation {
        std::string name;
        double lhs = 0.0;
        double rhs = 0.0;
        double slack = 0.0;
    };
    std::vector<Violation> violations;
};

// sup_local <= T <= dim_reg and box <= assouad <= dim_reg, within kChainTol.
ChainReport verify_dimension_chain(const MeasureModel& model, const ScaleGrid& grid,
                                   const std::vector<Point>& sample_points,
                                   const EstimatorOptions& opts = {});

}  // namespace regdim

#endif
