#ifndef REGDIM_SELF_SIMILAR_HPP
#define REGDIM_SELF_SIMILAR_HPP

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "regdim/measure_model.hpp"
#include "regdim/rational.hpp"
#include "regdim/similarity.hpp"

namespace regdim {

// Iterated function system of contracting similarities with a probability
// vector; carries an invariant hull ball B(hull_center, hull_radius) with
// S_i(hull) inside hull for every branch.
struct SelfSimilarSystem {
    std::vector<SimilarityMap> maps;   // ratios in (0, 1)
    std::vector<double> probs;         // positive, sum 1
    std::vector<Rational> prob_fracs;  // exact values of probs
    Point hull_center;
    double hull_radius = 0.0;

    std::size_t branch_count() const { return maps.size(); }
    std::size_t dim() const { return maps.empty() ? 0 : maps[0].dim(); }
    double diameter() const { return 2.0 * hull_radius; }
};

SelfSimilarSystem build_selfsimilar(std::vector<SimilarityMap> maps, std::vector<double> probs);
SelfSimilarSystem build_selfsimilar(std::vector<SimilarityMap> maps, std::vector<Rational> probs);

enum class SeparationStatus { Certified, Unknown, Violated };

struct SeparationResult {
    SeparationStatus status = SeparationStatus::Unknown;
    // Certified lower bound on the distance between distinct first-level
    // pieces; only meaningful when status == Certified.
    double delta = 0.0;
    // Diagnostics: best gap bound seen at the deepest refinement (can be <= 0).
    double min_gap_seen = 0.0;
    int depth_used = 0;
};

// Certifies strong separation by refining first-level pieces into cylinder
// bounding balls; detects provable failure via shared fixed points.
SeparationResult check_ssc(const SelfSimilarSystem& sys, int max_depth = 10);

// Certified enclosure of mu(B(x, r)) by cylinder subdivision. Requires a
// certified system (termination guarantee); subdivision of a boundary
// cylinder stops once its diameter drops below tol * r (mass goes to hi).
MassInterval ball_mass_ss(const SelfSimilarSystem& sys, const SeparationResult& sep,
                          const Point& x, double r, double tol = 1e-6);

// max_i log p_i / log c_i (valid under certified separation).
double regularity_dimension(const SelfSimilarSystem& sys);

// Point of the eventually periodic code preperiod . period^infinity, computed
// exactly as S_pre(fix(S_period)) via map composition and a linear solve.
Point point_from_code(const SelfSimilarSystem& sys, const std::vector<int>& preperiod,
                      const std::vector<int>& period);

// Exact product of branch probabilities along a word.
Rational cylinder_mass_exact(const SelfSimilarSystem& sys, const std::vector<int>& word);

class SelfSimilarModel : public MeasureModel {
public:
    explicit SelfSimilarModel(SelfSimilarSystem sys, int ssc_depth = 10);

    int ambient_dim() const override;
    MassInterval ball_mass(const Point& x, double r, double tol = 1e-6) const override;
    std::vector<Point> support_net(double scale) const override;
    std::vector<Point> witnesses() const override;

    // Closed-form moment of the canonical stopping-cylinder family
    // (diam <= r < parent diam): log sum of mass^q, via the branching
    // recursion M(r) = sum_i p_i^q M(r / c_i).
    std::optional<double> log_packing_moment(double r, double q) const override;
    std::optional<double> log_covering_count(const Point& x, double R, double r) const override;

    const SelfSimilarSystem& system() const { return sys_; }
    const SeparationResult& separation() const { return sep_; }

private:
    SelfSimilarSystem sys_;
    SeparationResult sep_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::pair<long long, long long>, double> moment_cache_;
};

}  // namespace regdim

#endif
