#ifndef REGDIM_SEQMEASURE_HPP
#define REGDIM_SEQMEASURE_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "regdim/mass_interval.hpp"
#include "regdim/measure_model.hpp"

namespace regdim {

// Discrete measure on a decreasing point sequence x_n -> 0 with one
// accumulation point at the origin: mu = (1/Z) sum_n p(n) delta_{x_n}.
// Both the points and the weights come in a polynomial and an exponential
// flavor:
//   points   Poly(lambda > 0):  x_n = n^-lambda      Exp(lambda in (0,1)): x_n = lambda^n
//   weights  Poly(omega > 1):   p(n) = n^-omega      Exp(omega in (0,1)):  p(n) = omega^n
enum class SeqKind { kPoly, kExp };

struct SeqParam {
    SeqKind kind = SeqKind::kPoly;
    double value = 1.0;
};

// Open-ball index window: the atoms inside B(x, r) are exactly
// k_under <= n <= k_over (k_over ignored when over_infinite, i.e. the ball
// reaches the accumulation point and every deep atom is inside).
// Indices are doubles: deep balls push k_over far beyond 2^53 and only the
// magnitude matters there.
struct IndexBounds {
    double k_under = 1.0;
    double k_over = 0.0;
    bool over_infinite = false;
    bool empty() const { return !over_infinite && k_over < k_under; }
};

// Closed-form regularity dimension; infinite for mixed kinds, where no
// doubling constant exists at any exponent.
struct SeqDimFormula {
    double value = 0.0;
    bool infinite = false;
};

// One nondoubling observation: certified lower bound on
// mu(B(x0, R)) / mu(B(x0, R/2)) at the kind-specific witness center x0.
struct DoublingWitness {
    double R = 0.0;
    double log_ratio = 0.0;
    double ratio = 0.0;  // exp(log_ratio), may overflow to +inf harmlessly
};

class SequenceMeasure final : public MeasureModel {
  public:
    SequenceMeasure(SeqParam x_param, SeqParam p_param, std::size_t cache_terms);

    int ambient_dim() const override { return 1; }
    MassInterval ball_mass(const Point& x, double r, double tol = 1e-6) const override;
    std::vector<Point> support_net(double scale) const override;
    std::vector<Point> witnesses() const override;
    std::optional<double> log_packing_moment(double r, double q) const override;
    std::optional<double> log_covering_count(const Point& x, double R, double r) const override;

    const SeqParam& x_param() const { return x_; }
    const SeqParam& p_param() const { return p_; }
    MassInterval normalizer() const { return normalizer_; }
    std::size_t cache_terms() const { return prefix_.empty() ? 0 : prefix_.size() - 1; }
    // sup_n p(n)/p(n+1): weight flatness constant, diagnostics only
    double alpha_bound() const { return alpha_; }

    double point_at(double n) const;    // x_n
    double log_weight(double n) const;  // log p(n), unnormalized
    // greatest n with x_n - x_{n+1} > gap, 0 if none: below it consecutive
    // atoms are closer than gap
    double separation_index(double gap) const;

    IndexBounds index_bounds(double x, double r) const;
    // unnormalized sum of p(n) over the window, as a log-scale enclosure
    MassInterval window_weight(const IndexBounds& w) const;

    // the three atoms whose distance to the origin matches rho; pairs an
    // estimator sample with a grid scale
    std::vector<Point> scale_witnesses(double rho) const;

    std::vector<DoublingWitness> doubling_violation_witness(
        const std::vector<double>& R_list) const;

  private:
    double n_from_point(double v) const;  // real-valued inverse of point_at
    double gap_at(double n) const;        // x_n - x_{n+1}, cancellation-free
    MassInterval tail_weight(double a) const;         // sum_{n >= a} p(n)
    MassInterval range_weight(double a, double b) const;  // sum_{a <= n <= b}
    double log_partial_power(double u, double m) const;   // log sum_{n<=m} n^-u, lower bound

    SeqParam x_;
    SeqParam p_;
    std::vector<double> prefix_;  // poly weights: prefix_[n] = sum_{k<=n} p(k)
    MassInterval normalizer_ = MassInterval::exact(1.0);
    double alpha_ = 1.0;
};

SequenceMeasure build_sequence_measure(SeqParam x_param, SeqParam p_param,
                                       std::size_t cache_terms = 1000000);
IndexBounds index_bounds(const SequenceMeasure& m, double x, double r);
MassInterval ball_mass_seq(const SequenceMeasure& m, double x, double r);
SeqDimFormula dim_reg_formula_seq(const SequenceMeasure& m);
std::vector<DoublingWitness> doubling_violation_witness(const SequenceMeasure& m,
                                                        const std::vector<double>& R_list);

}  // namespace regdim

#endif  // REGDIM_SEQMEASURE_HPP
