#include "regdim/self_similar.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <limits>
#include <stdexcept>

namespace regdim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(const std::vector<double>& v) {
    double m = kNegInf;
    for (double x : v) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

SimilarityMap identity_map(std::size_t d) {
    SimilarityMap id;
    id.ratio = 1.0;
    id.rot.assign(d * d, 0.0);
    for (std::size_t k = 0; k < d; ++k) id.rot[k * d + k] = 1.0;
    id.shift.assign(d, 0.0);
    return id;
}

void validate_common(const std::vector<SimilarityMap>& maps, const std::vector<double>& probs) {
    if (maps.empty()) throw std::invalid_argument("system needs at least one map");
    if (maps.size() != probs.size())
        throw std::invalid_argument("map and probability counts differ");
    const std::size_t d = maps[0].dim();
    for (const auto& m : maps) {
        if (m.dim() != d) throw std::invalid_argument("map dimension mismatch");
        if (!(m.ratio > 0.0) || !(m.ratio < 1.0))
            throw std::invalid_argument("contraction ratio must lie in (0,1)");
    }
    for (double p : probs)
        if (!(p > 0.0)) throw std::invalid_argument("probabilities must be positive");
}

// Sum over the stopping family below a lattice state of (relative mass)^q, in
// logs. A word stops once its scale log_diam + sum_i n_i log c_i drops to
// log_stop or below; states are branch-count vectors, so the memo is shared by
// every word with the same counts.
class StoppingMomentSum {
public:
    StoppingMomentSum(std::vector<double> log_c, std::vector<double> q_log_p, double log_diam,
                      double log_stop)
        : log_c_(std::move(log_c)),
          q_log_p_(std::move(q_log_p)),
          log_diam_(log_diam),
          log_stop_(log_stop) {}

    double eval(std::vector<int> state) {
        double log_scale = log_diam_;
        for (std::size_t i = 0; i < state.size(); ++i) log_scale += state[i] * log_c_[i];
        return rec(state, log_scale);
    }

private:
    double rec(std::vector<int>& state, double log_scale) {
        if (log_scale <= log_stop_) return 0.0;
        auto it = memo_.find(state);
        if (it != memo_.end()) return it->second;
        if (++visits_ > 50'000'000) throw std::runtime_error("stopping-moment budget exceeded");
        std::vector<double> terms;
        terms.reserve(log_c_.size());
        for (std::size_t i = 0; i < log_c_.size(); ++i) {
            ++state[i];
            terms.push_back(q_log_p_[i] + rec(state, log_scale + log_c_[i]));
            --state[i];
        }
        const double v = logsumexp(terms);
        memo_.emplace(state, v);
        return v;
    }

    std::vector<double> log_c_;    // log of contraction ratios (< 0)
    std::vector<double> q_log_p_;  // q * log p_i
    double log_diam_;
    double log_stop_;
    long long visits_ = 0;
    std::map<std::vector<int>, double> memo_;
};

}  // namespace

static SelfSimilarSystem finish_build(std::vector<SimilarityMap> maps, std::vector<double> probs,
                                      std::vector<Rational> fracs) {
    SelfSimilarSystem sys;
    sys.maps = std::move(maps);
    sys.probs = std::move(probs);
    sys.prob_fracs = std::move(fracs);

    // hull center: mean of fixed points; radius from the invariance bound
    // max_i |S_i(z) - z| / (1 - max c), slightly inflated.
    const std::size_t d = sys.dim();
    Point z;
    z.coords.assign(d, 0.0);
    for (const auto& m : sys.maps) {
        const Point f = fixed_point(m);
        for (std::size_t k = 0; k < d; ++k) z.coords[k] += f.coords[k];
    }
    for (std::size_t k = 0; k < d; ++k) z.coords[k] /= static_cast<double>(sys.maps.size());
    double cmax = 0.0;
    for (const auto& m : sys.maps) cmax = std::max(cmax, m.ratio);
    double worst = 0.0;
    for (const auto& m : sys.maps) worst = std::max(worst, dist(apply_similarity(m, z), z));
    sys.hull_center = z;
    sys.hull_radius = worst / (1.0 - cmax) * (1.0 + 1e-9);
    if (sys.hull_radius == 0.0) sys.hull_radius = 1e-12;  // single shared fixed point
    return sys;
}

SelfSimilarSystem build_selfsimilar(std::vector<SimilarityMap> maps, std::vector<double> probs) {
    validate_common(maps, probs);
    double s = 0.0;
    for (double p : probs) s += p;
    if (std::fabs(s - 1.0) > 1e-12) throw std::invalid_argument("probabilities must sum to 1");
    std::vector<Rational> fracs;
    fracs.reserve(probs.size());
    for (double p : probs) fracs.push_back(rational_from_double(p));
    return finish_build(std::move(maps), std::move(probs), std::move(fracs));
}

SelfSimilarSystem build_selfsimilar(std::vector<SimilarityMap> maps, std::vector<Rational> probs) {
    std::vector<double> dp;
    dp.reserve(probs.size());
    Rational sum = 0;
    for (const auto& p : probs) {
        if (p <= 0) throw std::invalid_argument("probabilities must be positive");
        sum += p;
        dp.push_back(to_double(p));
    }
    validate_common(maps, dp);
    if (sum != 1) throw std::invalid_argument("probabilities must sum to 1");
    return finish_build(std::move(maps), std::move(dp), std::move(probs));
}

SeparationResult check_ssc(const SelfSimilarSystem& sys, int max_depth) {
    const std::size_t n = sys.branch_count();
    SeparationResult res;
    if (n < 2) {
        res.status = SeparationStatus::Certified;
        res.delta = MassInterval::inf();
        return res;
    }
    // provable failure: two branches sharing a fixed point
    std::vector<Point> fixes;
    for (const auto& m : sys.maps) fixes.push_back(fixed_point(m));
    const double tol = 1e-12 * (1.0 + sys.hull_radius);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (dist(fixes[i], fixes[j]) <= tol) {
                res.status = SeparationStatus::Violated;
                return res;
            }

    struct Ball {
        Point c;
        double r;
    };
    // per first-level branch: bounding balls of its depth-k refinements
    std::vector<std::vector<SimilarityMap>> words(n);
    for (std::size_t i = 0; i < n; ++i) words[i] = {sys.maps[i]};

    for (int depth = 1; depth <= max_depth; ++depth) {
        std::vector<std::vector<Ball>> balls(n);
        std::size_t total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            balls[i].reserve(words[i].size());
            for (const auto& w : words[i])
                balls[i].push_back(
                    Ball{apply_similarity(w, sys.hull_center), w.ratio * sys.hull_radius});
            total += words[i].size();
        }
        double gap = MassInterval::inf();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                for (const auto& a : balls[i])
                    for (const auto& b : balls[j])
                        gap = std::min(gap, dist(a.c, b.c) - a.r - b.r);
        res.min_gap_seen = gap;
        res.depth_used = depth;
        if (gap > 0.0) {
            res.status = SeparationStatus::Certified;
            res.delta = gap;
            return res;
        }
        if (depth == max_depth || total * n > 400'000) break;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<SimilarityMap> next;
            next.reserve(words[i].size() * n);
            for (const auto& w : words[i])
                for (const auto& m : sys.maps) next.push_back(compose(w, m));
            words[i] = std::move(next);
        }
    }
    res.status = SeparationStatus::Unknown;
    return res;
}

MassInterval ball_mass_ss(const SelfSimilarSystem& sys, const SeparationResult& sep,
                          const Point& x, double r, double tol) {
    if (sep.status != SeparationStatus::Certified)
        throw std::domain_error("ball_mass_ss requires a certified separated system");
    if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
    if (!(tol > 0.0) || !(tol < 1.0)) throw std::invalid_argument("tol must lie in (0,1)");
    if (x.dim() != sys.dim()) throw std::invalid_argument("point dimension mismatch");

    struct Node {
        SimilarityMap map;
        double mass;
    };
    std::vector<Node> work, frontier;
    work.push_back(Node{identity_map(sys.dim()), 1.0});

    // Subdivide until the unresolved boundary mass meets the relative width
    // request; each round shrinks the stopping diameter for boundary nodes.
    double lo = 0.0, straddle = 0.0;
    double stop = tol * r;
    long long budget = 0;
    for (;;) {
        straddle = 0.0;
        frontier.clear();
        while (!work.empty()) {
            Node node = std::move(work.back());
            work.pop_back();
            if (++budget > 40'000'000) throw std::runtime_error("subdivision budget exceeded");
            const Point c = apply_similarity(node.map, sys.hull_center);
            const double rad = node.map.ratio * sys.hull_radius;
            const double dx = dist(c, x);
            if (dx + rad < r) {
                lo += node.mass;
                continue;
            }
            if (dx - rad >= r) continue;
            if (2.0 * rad < stop || node.mass < 1e-308) {
                straddle += node.mass;
                frontier.push_back(std::move(node));
                continue;
            }
            for (std::size_t i = 0; i < sys.branch_count(); ++i)
                work.push_back(Node{compose(node.map, sys.maps[i]), node.mass * sys.probs[i]});
        }
        if (straddle <= tol * (lo + straddle) || stop < 1e-290 || frontier.empty()) break;
        work.swap(frontier);
        stop /= 64.0;
    }
    return MassInterval(lo, std::min(1.0, lo + straddle));
}

double regularity_dimension(const SelfSimilarSystem& sys) {
    double best = 0.0;
    for (std::size_t i = 0; i < sys.branch_count(); ++i)
        best = std::max(best, std::log(sys.probs[i]) / std::log(sys.maps[i].ratio));
    return best;
}

Point point_from_code(const SelfSimilarSystem& sys, const std::vector<int>& preperiod,
                      const std::vector<int>& period) {
    if (period.empty()) throw std::invalid_argument("period must be nonempty");
    auto check = [&](int d) {
        if (d < 0 || static_cast<std::size_t>(d) >= sys.branch_count())
            throw std::invalid_argument("code digit out of range");
    };
    for (int d : preperiod) check(d);
    for (int d : period) check(d);
    SimilarityMap per = sys.maps[static_cast<std::size_t>(period[0])];
    for (std::size_t k = 1; k < period.size(); ++k)
        per = compose(per, sys.maps[static_cast<std::size_t>(period[k])]);
    Point x = fixed_point(per);
    for (auto it = preperiod.rbegin(); it != preperiod.rend(); ++it)
        x = apply_similarity(sys.maps[static_cast<std::size_t>(*it)], x);
    return x;
}

Rational cylinder_mass_exact(const SelfSimilarSystem& sys, const std::vector<int>& word) {
    Rational m = 1;
    for (int d : word) {
        if (d < 0 || static_cast<std::size_t>(d) >= sys.branch_count())
            throw std::invalid_argument("word digit out of range");
        m *= sys.prob_fracs[static_cast<std::size_t>(d)];
    }
    return m;
}

SelfSimilarModel::SelfSimilarModel(SelfSimilarSystem sys, int ssc_depth)
    : sys_(std::move(sys)), sep_(check_ssc(sys_, ssc_depth)) {}

int SelfSimilarModel::ambient_dim() const { return static_cast<int>(sys_.dim()); }

MassInterval SelfSimilarModel::ball_mass(const Point& x, double r, double tol) const {
    return ball_mass_ss(sys_, sep_, x, r, tol);
}

std::vector<Point> SelfSimilarModel::support_net(double scale) const {
    if (!(scale > 0.0)) throw std::invalid_argument("scale must be positive");
    // one representative per stopping cylinder: the fixed point of its last
    // branch, i.e. the "outward" corner. Adjacent stopping cylinders then get
    // reps on facing-away ends, so packings at commensurate radii survive.
    std::vector<Point> fixes;
    for (const auto& m : sys_.maps) fixes.push_back(fixed_point(m));
    struct Node {
        SimilarityMap map;
        std::size_t last = 0;
    };
    std::vector<Point> net;
    std::deque<Node> work;
    work.push_back(Node{identity_map(sys_.dim()), 0});
    while (!work.empty()) {
        Node w = std::move(work.front());
        work.pop_front();
        if (2.0 * w.map.ratio * sys_.hull_radius <= scale) {
            net.push_back(apply_similarity(w.map, fixes[w.last]));
            if (net.size() > (1u << 22)) throw std::invalid_argument("net scale too fine");
            continue;
        }
        for (std::size_t i = 0; i < sys_.branch_count(); ++i)
            work.push_back(Node{compose(w.map, sys_.maps[i]), i});
        if (work.size() > (1u << 23)) throw std::invalid_argument("net scale too fine");
    }
    return net;
}

std::vector<Point> SelfSimilarModel::witnesses() const {
    std::vector<Point> out;
    const int n = static_cast<int>(sys_.branch_count());
    for (int i = 0; i < n; ++i) out.push_back(point_from_code(sys_, {}, {i}));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            out.push_back(point_from_code(sys_, {}, {i, j}));
            out.push_back(point_from_code(sys_, {i}, {j}));
        }
    return out;
}

std::optional<double> SelfSimilarModel::log_packing_moment(double r, double q) const {
    if (!(r > 0.0)) return std::nullopt;
    const double log_r = std::log(r);
    const double log_diam = std::log(sys_.diameter());
    if (log_r >= log_diam) return 0.0;
    double min_drop = MassInterval::inf();
    for (const auto& m : sys_.maps) min_drop = std::min(min_drop, -std::log(m.ratio));
    if ((log_diam - log_r) / min_drop > 2500.0) return std::nullopt;  // lattice too deep

    long long rk, qk;
    static_assert(sizeof(double) == sizeof(long long));
    std::memcpy(&rk, &r, sizeof r);
    std::memcpy(&qk, &q, sizeof q);
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = moment_cache_.find({rk, qk});
        if (it != moment_cache_.end()) return it->second;
    }
    std::vector<double> log_c, q_log_p;
    for (std::size_t i = 0; i < sys_.branch_count(); ++i) {
        log_c.push_back(std::log(sys_.maps[i].ratio));
        q_log_p.push_back(q * std::log(sys_.probs[i]));
    }
    StoppingMomentSum sum(std::move(log_c), std::move(q_log_p), log_diam, log_r);
    const double v = sum.eval(std::vector<int>(sys_.branch_count(), 0));
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        moment_cache_[{rk, qk}] = v;
    }
    return v;
}

std::optional<double> SelfSimilarModel::log_covering_count(const Point& x, double R,
                                                           double r) const {
    if (!(r > 0.0) || !(R > r) || x.dim() != sys_.dim()) return std::nullopt;
    const double log_r = std::log(r);
    const double log_diam = std::log(sys_.diameter());
    std::vector<double> log_c, zeros(sys_.branch_count(), 0.0);
    for (const auto& m : sys_.maps) log_c.push_back(std::log(m.ratio));
    double min_drop = MassInterval::inf();
    for (double lc : log_c) min_drop = std::min(min_drop, -lc);
    if ((log_diam - log_r) / min_drop > 2500.0) return std::nullopt;
    // count of stopping descendants below a lattice state, shared memo
    StoppingMomentSum counter(log_c, zeros, log_diam, log_r);

    struct Node {
        SimilarityMap map;
        std::vector<int> state;
    };
    std::deque<Node> work;
    work.push_back(Node{identity_map(sys_.dim()), std::vector<int>(sys_.branch_count(), 0)});
    std::vector<double> pieces;
    long long budget = 0;
    while (!work.empty()) {
        Node node = std::move(work.back());
        work.pop_back();
        if (++budget > 4'000'000) return std::nullopt;
        const Point c = apply_similarity(node.map, sys_.hull_center);
        const double rad = node.map.ratio * sys_.hull_radius;
        const double dx = dist(c, x);
        if (dx - rad >= R) continue;
        if (std::log(node.map.ratio) + log_diam <= log_r) {
            pieces.push_back(0.0);  // a stopping cylinder meeting the ball
            continue;
        }
        if (dx + rad < R) {
            pieces.push_back(counter.eval(node.state));
            continue;
        }
        for (std::size_t i = 0; i < sys_.branch_count(); ++i) {
            Node child{compose(node.map, sys_.maps[i]), node.state};
            ++child.state[i];
            work.push_back(std::move(child));
        }
    }
    if (pieces.empty()) return std::nullopt;
    return logsumexp(pieces);
}

}  // namespace regdim
