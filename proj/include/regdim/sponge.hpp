#ifndef REGDIM_SPONGE_HPP
#define REGDIM_SPONGE_HPP

#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "regdim/measure_model.hpp"
#include "regdim/rational.hpp"

namespace regdim {

// One digit of a grid-aligned self-affine system: an integer per axis,
// digit[l] in {0, ..., bases[l]-1}.
using SpongeDigit = std::vector<int>;

// Grid-aligned self-affine digit system on [0,1]^d with strictly increasing
// integer bases and a probability per digit. Conditional probabilities
// cond[i][l] = p(digit i_l | i_1..i_{l-1}) and per-prefix marginals are
// precomputed exactly; digits are kept sorted lexicographically.
struct SpongeSystem {
    int d = 0;
    std::vector<int> bases;               // n_1 < n_2 < ... < n_d
    std::vector<SpongeDigit> digits;      // sorted, unique
    std::vector<Rational> probs;          // aligned with digits, sum == 1
    std::vector<std::vector<Rational>> cond;      // cond[digit][axis]
    std::vector<std::vector<double>> cond_log;    // log of cond
    // Per prefix length a = 0..d: class id of each digit's length-a prefix,
    // the exact marginal mass of each class, and its log.
    std::vector<std::vector<int>> class_id;       // class_id[a][digit]
    std::vector<std::vector<Rational>> class_mass;
    std::vector<std::vector<double>> class_log;

    std::size_t branch_count() const { return digits.size(); }
    int class_count(int a) const { return static_cast<int>(class_mass[a].size()); }
};

SpongeSystem build_sponge(int d, std::vector<int> bases, std::vector<SpongeDigit> digits,
                          std::vector<double> probs);
SpongeSystem build_sponge(int d, std::vector<int> bases, std::vector<SpongeDigit> digits,
                          std::vector<Rational> probs);

// Eventually periodic digit word; entries are indices into system.digits.
struct SymbolicPoint {
    std::vector<int> preperiod;
    std::vector<int> period;  // nonempty

    // 1-based position.
    int digit_at(long t) const {
        if (t <= static_cast<long>(preperiod.size())) return preperiod[t - 1];
        long s = (t - static_cast<long>(preperiod.size()) - 1) % static_cast<long>(period.size());
        return period[s];
    }
};

// Resolves raw digit tuples to indices; throws if a tuple is not in I.
SymbolicPoint make_symbolic(const SpongeSystem& sys, const std::vector<SpongeDigit>& preperiod,
                            const std::vector<SpongeDigit>& period);

struct DepthVector {
    std::vector<long> k;  // nonincreasing: k_1 >= k_2 >= ... >= k_d
};

// True iff any two digits that first disagree at axis l differ there by
// more than 1 (digit-grid separation).
bool check_vssc(const SpongeSystem& sys);

// The unique k_l >= 0 with n_l^-(k_l+1) < r <= n_l^-k_l, decided by exact
// integer-power comparison on the exact binary value of r. Values within
// 2^-49 (relative) above an exact power count as that power, so radii
// computed as pow(n, -k) land on the <= side regardless of rounding.
DepthVector depth_vector(const SpongeSystem& sys, double r);

// log mu(Q(omega, r)): sum of conditional log-probabilities over the depth
// vector of r. Exact variant multiplies the rationals instead.
double approx_cube_mass_log(const SpongeSystem& sys, const SymbolicPoint& omega, double r);
Rational approx_cube_mass_exact(const SpongeSystem& sys, const SymbolicPoint& omega, double r);
double approx_cube_mass(const SpongeSystem& sys, const SymbolicPoint& omega, double r);

// Sandwich for the mass of B(pi(omega), r): the cube inside the ball at
// radius r / (n_1 (n_1+...+n_d)) and the cube containing it at radius
// 2 n_1 r (clamped to the whole space). Requires the VSSC.
MassInterval ball_mass_sponge(const SpongeSystem& sys, const SymbolicPoint& omega, double r);

// sum_l max_i -log p_l(i) / log n_l. Requires the VSSC.
double dim_reg_formula_sponge(const SpongeSystem& sys);

// Code realising the extremal mass ratio across scales (r, R): the arg-min
// conditional digit of axis l on positions k_l(R)+1 .. k_l(r), the smallest
// digit of I elsewhere. Requires r < R/n_d and, for l < d,
// (n_l R)^(log n_{l+1} / log n_l) < r, which force the depth interleaving
// k_d(R) < k_d(r) < k_{d-1}(R) < ... < k_1(R) < k_1(r); throws naming the
// first violated inequality otherwise.
SymbolicPoint extremal_code(const SpongeSystem& sys, double r, double R);

// Geometric point of a code: x_l = sum_t digit(t)_l n_l^-t.
Point point_of(const SpongeSystem& sys, const SymbolicPoint& omega);

// The four curves of the epsilon family on the (3,4)-grid with digits
// {(0,2),(2,1),(2,3)} and weights (eps, 1-3eps/2, eps/2), eps in (0, 1/2].
struct BadCarpetCurves {
    double dim_reg = 0.0;
    double dim_assouad = 0.0;
    double sup_local = 0.0;
    double top_spectrum = 0.0;
};

BadCarpetCurves badcarpet_family(double epsilon);
SpongeSystem make_badcarpet_system(double epsilon);

// Measure model over a sponge system. Mass queries are resolved through
// digit codes: points emitted by the model (witnesses, nets, registered
// codes) carry their codes in a registry; other points fall back to exact
// greedy digit extraction and raise NoDataError once it leaves the digit
// set. Ball masses are approximate-cube masses: exact single-cube masses in
// Cube mode (the default used by the estimators) or the two-sided sandwich
// of ball_mass_sponge in Sandwich mode.
class SpongeModel : public MeasureModel {
public:
    enum class MassMode { Cube, Sandwich };

    explicit SpongeModel(SpongeSystem sys, MassMode mode = MassMode::Cube);

    int ambient_dim() const override;
    MassInterval ball_mass(const Point& x, double r, double tol = 1e-6) const override;
    // One corner point per approximate cube at depth_vector(scale); corners
    // are cube corners (within a cube diagonal of the support), each mapped
    // in the registry to the cube's canonical support code.
    std::vector<Point> support_net(double scale) const override;
    std::vector<Point> witnesses() const override;

    // Factorised cube moment: log sum over depth-k(r) cubes of mass^q
    //   = sum_a (k_a - k_{a+1}) log S_a(q),  S_a(q) = sum_class marginal^q.
    std::optional<double> log_packing_moment(double r, double q) const override;
    // Count of depth-k(r) subcubes of Q(code(x), R): product over positions
    // of the number of admissible class choices given the pinned prefix.
    std::optional<double> log_covering_count(const Point& x, double R, double r) const override;

    // Registers the code's point for later mass queries and returns it.
    Point register_code(const SymbolicPoint& omega) const;

    const SpongeSystem& system() const { return sys_; }

private:
    std::optional<SymbolicPoint> resolve(const Point& x) const;

    SpongeSystem sys_;
    MassMode mode_;
    mutable std::mutex registry_mutex_;
    mutable std::map<std::vector<double>, SymbolicPoint> registry_;
};

}  // namespace regdim

#endif
