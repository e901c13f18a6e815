#include "regdim/seqmeasure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace regdim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// windows at most this wide are summed term by term
constexpr double kDirectLimit = 4096.0;
// direct part of the partial power sums used by the moment hook
constexpr double kMomentDirect = 100000.0;
// adjustment cap for index searches seeded by a closed-form candidate; deep
// indices (beyond 2^53) stop moving in double steps and keep the candidate
constexpr int kAdjustCap = 400;

double log_sum_2(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// small outward nudge covering the double rounding of a log endpoint
double down(double lg) { return lg - 4e-16 * (1.0 + std::fabs(lg)); }
double up(double lg) { return lg + 4e-16 * (1.0 + std::fabs(lg)); }

}  // namespace

SequenceMeasure::SequenceMeasure(SeqParam x_param, SeqParam p_param, std::size_t cache_terms)
    : x_(x_param), p_(p_param) {
    if (cache_terms < 1000)
        throw std::invalid_argument("cache_terms must be at least 1000");
    if (!std::isfinite(x_.value) || !std::isfinite(p_.value))
        throw std::invalid_argument("sequence parameters must be finite");
    if (x_.kind == SeqKind::kPoly) {
        if (!(x_.value > 0.0))
            throw std::invalid_argument("polynomial points need a positive exponent");
    } else {
        if (!(x_.value > 0.0 && x_.value < 1.0))
            throw std::invalid_argument("exponential points need a base in (0,1)");
    }
    if (p_.kind == SeqKind::kPoly) {
        if (!(p_.value > 1.0))
            throw std::invalid_argument(
                "polynomial weights need an exponent above 1: the weight series diverges");
        prefix_.resize(cache_terms + 1, 0.0);
        long double acc = 0.0L;
        for (std::size_t n = 1; n <= cache_terms; ++n) {
            acc += static_cast<long double>(std::pow(static_cast<double>(n), -p_.value));
            prefix_[n] = static_cast<double>(acc);
        }
        const double n_max = static_cast<double>(cache_terms);
        const MassInterval tail = tail_weight(n_max + 1.0);
        const double lo = prefix_[cache_terms] + tail.lo();
        const double hi = prefix_[cache_terms] + tail.hi();
        normalizer_ = MassInterval::from_log(down(std::log(lo)), up(std::log(hi)));
        alpha_ = std::pow(2.0, p_.value);  // p(1)/p(2), the flattest step
    } else {
        if (!(p_.value > 0.0 && p_.value < 1.0))
            throw std::invalid_argument("exponential weights need a base in (0,1)");
        // sum_{n>=1} w^n = w/(1-w), exact
        const double lg = std::log(p_.value) - std::log1p(-p_.value);
        normalizer_ = MassInterval::from_log(down(lg), up(lg));
        alpha_ = 1.0 / p_.value;
    }
}

double SequenceMeasure::point_at(double n) const {
    // pow keeps dyadic cases exact; exp(n*log v) drifts by an ulp and would
    // flip strict window edges
    if (x_.kind == SeqKind::kPoly) return std::pow(n, -x_.value);
    return std::pow(x_.value, n);
}

double SequenceMeasure::log_weight(double n) const {
    if (p_.kind == SeqKind::kPoly) return -p_.value * std::log(n);
    return n * std::log(p_.value);
}

double SequenceMeasure::n_from_point(double v) const {
    if (!(v > 0.0)) return kInf;
    if (x_.kind == SeqKind::kPoly) return std::pow(v, -1.0 / x_.value);
    return std::log(v) / std::log(x_.value);
}

double SequenceMeasure::gap_at(double n) const {
    if (x_.kind == SeqKind::kPoly)
        return point_at(n) * (-std::expm1(-x_.value * std::log1p(1.0 / n)));
    return point_at(n) * (1.0 - x_.value);
}

double SequenceMeasure::separation_index(double gap) const {
    if (!(gap > 0.0)) throw std::invalid_argument("separation_index needs a positive gap");
    if (!(gap_at(1.0) > gap)) return 0.0;
    double c;
    if (x_.kind == SeqKind::kPoly)
        c = std::pow(x_.value / gap, 1.0 / (x_.value + 1.0));
    else
        c = std::log(gap / (1.0 - x_.value)) / std::log(x_.value);
    double k = std::max(1.0, std::floor(c));
    for (int i = 0; i < kAdjustCap && gap_at(k + 1.0) > gap; ++i) k += 1.0;
    for (int i = 0; i < kAdjustCap && k > 1.0 && !(gap_at(k) > gap); ++i) k -= 1.0;
    return k;
}

IndexBounds SequenceMeasure::index_bounds(double x, double r) const {
    if (!(r > 0.0) || !std::isfinite(r) || !std::isfinite(x))
        throw std::invalid_argument("index_bounds needs finite x and r > 0");
    IndexBounds w;
    if (!(x + r > 0.0)) {  // window entirely left of the support
        w.k_under = 1.0;
        w.k_over = 0.0;
        return w;
    }
    // least n with x_n - x < r; the difference form stays exact when r is far
    // below ulp(x)
    auto inside_upper = [&](double n) { return point_at(n) - x < r; };
    if (inside_upper(1.0)) {
        w.k_under = 1.0;
    } else {
        double k = std::max(1.0, std::floor(n_from_point(x + r)));
        if (!std::isfinite(k)) k = 1.0;
        for (int i = 0; i < kAdjustCap && k > 1.0 && inside_upper(k - 1.0); ++i) k -= 1.0;
        for (int i = 0; i < kAdjustCap && !inside_upper(k); ++i) k += 1.0;
        w.k_under = k;
    }
    if (!(r < x)) {  // the ball reaches the accumulation point
        w.over_infinite = true;
        return w;
    }
    auto inside_lower = [&](double n) { return x - point_at(n) < r; };
    double k = std::max(1.0, std::floor(n_from_point(x - r)));
    if (!std::isfinite(k)) k = 1.0;
    for (int i = 0; i < kAdjustCap && inside_lower(k + 1.0); ++i) k += 1.0;
    for (int i = 0; i < kAdjustCap && k >= 1.0 && !inside_lower(k); ++i) k -= 1.0;
    w.k_over = k;  // may drop to 0: empty window
    return w;
}

MassInterval SequenceMeasure::tail_weight(double a) const {
    if (p_.kind == SeqKind::kExp) {
        const double lg = a * std::log(p_.value) - std::log1p(-p_.value);
        return MassInterval::from_log(down(lg), up(lg));
    }
    // integral sandwich: sum_{n>=a} n^-w in [a^(1-w), (a-1)^(1-w)] / (w-1)
    const double s = 1.0 - p_.value;
    const double ld = s * std::log(a) - std::log(p_.value - 1.0);
    const double lu = s * std::log(a - 1.0) - std::log(p_.value - 1.0);
    return MassInterval::from_log(down(ld), up(lu));
}

MassInterval SequenceMeasure::range_weight(double a, double b) const {
    if (b < a) return MassInterval::zero();
    if (a == b) {
        const double lg = log_weight(a);
        return MassInterval::from_log(down(lg), up(lg));
    }
    if (p_.kind == SeqKind::kExp) {
        // w^a (1 - w^(b-a+1)) / (1 - w), exact geometric
        const double lw = std::log(p_.value);
        const double lg = a * lw + std::log1p(-std::pow(p_.value, b - a + 1.0)) -
                          std::log1p(-p_.value);
        return MassInterval::from_log(down(lg), up(lg));
    }
    const double cnt = b - a + 1.0;
    if (cnt <= kDirectLimit) {
        long double acc = 0.0L;
        for (double n = a; n <= b; n += 1.0)
            acc += static_cast<long double>(std::pow(n, -p_.value));
        const double lg = std::log(static_cast<double>(acc));
        const double pad = 4e-16 + 1e-18 * cnt;
        return MassInterval::from_log(lg - pad * (1.0 + std::fabs(lg)),
                                      lg + pad * (1.0 + std::fabs(lg)));
    }
    const double n_max = static_cast<double>(cache_terms());
    if (b <= n_max) {
        // prefix difference; the bump covers cancellation of the stored sums
        const std::size_t ia = static_cast<std::size_t>(a);
        const std::size_t ib = static_cast<std::size_t>(b);
        const double span = prefix_[ib] - prefix_[ia - 1];
        const double rel = 4.4e-16 * prefix_[ib] / span + 1e-15;
        return MassInterval::from_log(std::log(span) - rel, std::log(span) + rel);
    }
    // tail difference, with the in-cache part split off when the window
    // crosses the cache boundary
    double head_lo = 0.0, head_hi = 0.0;
    double ta = a;
    if (a <= n_max) {
        const MassInterval head = range_weight(a, n_max);
        head_lo = head.lo();
        head_hi = head.hi();
        ta = n_max + 1.0;
    }
    const MassInterval t0 = tail_weight(ta);
    const MassInterval t1 = tail_weight(b + 1.0);
    const double lo = head_lo + t0.lo() - t1.hi();
    const double hi = head_hi + t0.hi() - t1.lo();
    if (!(lo > 0.0)) {
        // narrow far window where the sandwich ends cross: sum directly
        // (reachable only for widths just above the direct limit)
        long double acc = 0.0L;
        for (double n = a; n <= b; n += 1.0)
            acc += static_cast<long double>(std::pow(n, -p_.value));
        const double lg = std::log(static_cast<double>(acc));
        const double pad = 4e-16 + 1e-18 * cnt;
        return MassInterval::from_log(lg - pad * (1.0 + std::fabs(lg)),
                                      lg + pad * (1.0 + std::fabs(lg)));
    }
    return MassInterval::from_log(down(std::log(lo)), up(std::log(hi)));
}

MassInterval SequenceMeasure::window_weight(const IndexBounds& w) const {
    if (w.empty()) return MassInterval::zero();
    if (!w.over_infinite) return range_weight(w.k_under, w.k_over);
    if (p_.kind == SeqKind::kExp) return tail_weight(w.k_under);
    const double n_max = static_cast<double>(cache_terms());
    if (w.k_under > n_max) return tail_weight(w.k_under);
    const MassInterval head = range_weight(w.k_under, n_max);
    const MassInterval tail = tail_weight(n_max + 1.0);
    return MassInterval::from_log(down(std::log(head.lo() + tail.lo())),
                                  up(std::log(head.hi() + tail.hi())));
}

MassInterval SequenceMeasure::ball_mass(const Point& x, double r, double tol) const {
    (void)tol;  // enclosures below are already the tightest certified ones
    if (x.dim() != 1) throw std::invalid_argument("sequence measures live on the line");
    const IndexBounds w = index_bounds(x[0], r);
    const MassInterval weight = window_weight(w);
    if (weight.is_zero()) return MassInterval::zero();
    return weight.divided_by(normalizer_);
}

std::vector<Point> SequenceMeasure::support_net(double scale) const {
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw std::invalid_argument("support_net needs a positive scale");
    double n_cut = 0.0;
    if (point_at(1.0) >= scale) {
        double k = std::max(1.0, std::floor(n_from_point(scale)));
        if (!std::isfinite(k)) k = 1.0;
        for (int i = 0; i < kAdjustCap && point_at(k + 1.0) >= scale; ++i) k += 1.0;
        for (int i = 0; i < kAdjustCap && k > 1.0 && !(point_at(k) >= scale); ++i) k -= 1.0;
        n_cut = k;
    }
    if (n_cut > 4194304.0)
        throw std::invalid_argument("support_net scale too fine to enumerate");
    std::vector<Point> net;
    net.reserve(static_cast<std::size_t>(n_cut) + 2);
    net.push_back(Point{0.0});
    for (double n = 1.0; n <= n_cut; n += 1.0) net.push_back(Point{point_at(n)});
    net.push_back(Point{point_at(n_cut + 1.0)});  // one sub-scale bucket survives
    return net;
}

std::vector<Point> SequenceMeasure::witnesses() const {
    return {Point{0.0},          Point{point_at(1.0)},  Point{point_at(2.0)},
            Point{point_at(5.0)}, Point{point_at(20.0)}, Point{point_at(100.0)}};
}

std::vector<Point> SequenceMeasure::scale_witnesses(double rho) const {
    if (!(rho > 0.0) || !std::isfinite(rho))
        throw std::invalid_argument("scale_witnesses needs a positive scale");
    const double ns = std::max(2.0, std::round(n_from_point(rho)));
    return {Point{point_at(ns - 1.0)}, Point{point_at(ns)}, Point{point_at(ns + 1.0)}};
}

double SequenceMeasure::log_partial_power(double u, double m) const {
    const double cap = std::min(m, kMomentDirect);
    long double acc = 0.0L;
    for (double n = 1.0; n <= cap; n += 1.0)
        acc += static_cast<long double>(std::pow(n, -u));
    const double direct = std::log(static_cast<double>(acc));
    if (m <= kMomentDirect) return direct;
    // integral lower bound on the remainder over (K, m]
    const double K = kMomentDirect;
    double rest;
    if (u < 1.0) {
        const double A = (1.0 - u) * std::log(m + 1.0);
        const double B = (1.0 - u) * std::log(K + 1.0);
        rest = A + std::log1p(-std::exp(B - A)) - std::log(1.0 - u);
    } else if (u == 1.0) {
        rest = std::log(std::log((m + 1.0) / (K + 1.0)));
    } else {
        const double A = (u - 1.0) * std::log(K + 1.0);
        const double B = (u - 1.0) * std::log(m + 1.0);
        rest = -A + std::log1p(-std::exp(A - B)) - std::log(u - 1.0);
    }
    return log_sum_2(direct, rest);
}

std::optional<double> SequenceMeasure::log_packing_moment(double r, double q) const {
    if (!(r > 0.0) || !std::isfinite(r) || !std::isfinite(q)) return std::nullopt;
    // canonical family: atoms whose spacing exceeds 2r (pairwise disjoint
    // r-balls) plus the ball at the accumulation point
    const double m = separation_index(2.0 * r);
    double total = -kInf;
    if (m >= 1.0) {
        double part;
        if (p_.kind == SeqKind::kPoly) {
            part = log_partial_power(p_.value * q, m);
        } else {
            const double lt = q * std::log(p_.value);
            if (lt == 0.0)
                part = std::log(m);
            else if (lt < 0.0)
                part = lt + std::log1p(-std::exp(m * lt)) - std::log1p(-std::exp(lt));
            else
                part = m * lt + std::log1p(-std::exp(-m * lt)) - std::log1p(-std::exp(-lt));
        }
        // certified lower bound: divide by the unfavorable normalizer end
        part -= q >= 0.0 ? q * normalizer_.log_hi() : q * normalizer_.log_lo();
        total = log_sum_2(total, part);
    }
    const MassInterval blob = ball_mass(Point{0.0}, r);
    if (!blob.is_zero())
        total = log_sum_2(total, q >= 0.0 ? q * blob.log_lo() : q * blob.log_hi());
    if (total == -kInf) return std::nullopt;
    return total;
}

std::optional<double> SequenceMeasure::log_covering_count(const Point& x, double R,
                                                          double r) const {
    if (x.dim() != 1 || !(R > 0.0) || !(r > 0.0) || !(r < R)) return std::nullopt;
    const double c = x[0];
    const double ns = separation_index(r);
    const IndexBounds w = index_bounds(c, R);
    if (w.empty()) return std::nullopt;
    const double beff = w.over_infinite ? kInf : w.k_over;
    double count = 0.0;
    const double sep_top = std::min(beff, ns);
    if (w.k_under <= sep_top) count += sep_top - w.k_under + 1.0;
    if (w.over_infinite || w.k_over > ns) {
        // below the separation index the atoms are denser than r: cover that
        // stretch of the window with 2r-wide buckets
        const double cl_hi = std::min(c + R, point_at(ns + 1.0));
        const double cl_lo = std::max(c - R, 0.0);
        if (cl_hi > cl_lo) count += std::floor((cl_hi - cl_lo) / (2.0 * r)) + 1.0;
    }
    if (!(count > 0.0)) return std::nullopt;
    return std::log(count);
}

std::vector<DoublingWitness> SequenceMeasure::doubling_violation_witness(
    const std::vector<double>& R_list) const {
    if (x_.kind == p_.kind)
        throw std::invalid_argument(
            "doubling witnesses need mixed point/weight kinds: pure models are doubling");
    std::vector<DoublingWitness> out;
    out.reserve(R_list.size());
    for (double R : R_list) {
        if (!(R > 0.0) || !(R < point_at(1.0)))
            throw std::invalid_argument("witness radii must lie inside (0, x_1)");
        // polynomial points escape at the origin, exponential points at the
        // matched atom x = R
        const double x0 = x_.kind == SeqKind::kPoly ? 0.0 : R;
        const MassInterval outer = ball_mass(Point{x0}, R);
        const MassInterval inner = ball_mass(Point{x0}, R / 2.0);
        DoublingWitness wit;
        wit.R = R;
        wit.log_ratio = outer.log_lo() - inner.log_hi();
        wit.ratio = std::exp(wit.log_ratio);
        out.push_back(wit);
    }
    return out;
}

SequenceMeasure build_sequence_measure(SeqParam x_param, SeqParam p_param,
                                       std::size_t cache_terms) {
    return SequenceMeasure(x_param, p_param, cache_terms);
}

IndexBounds index_bounds(const SequenceMeasure& m, double x, double r) {
    return m.index_bounds(x, r);
}

MassInterval ball_mass_seq(const SequenceMeasure& m, double x, double r) {
    return m.ball_mass(Point{x}, r);
}

SeqDimFormula dim_reg_formula_seq(const SequenceMeasure& m) {
    SeqDimFormula f;
    const SeqParam& xp = m.x_param();
    const SeqParam& pp = m.p_param();
    if (xp.kind != pp.kind) {
        f.infinite = true;
        f.value = kInf;
        return f;
    }
    if (xp.kind == SeqKind::kPoly)
        f.value = std::max(1.0, (pp.value - 1.0) / xp.value);
    else
        f.value = std::log(pp.value) / std::log(xp.value);
    return f;
}

std::vector<DoublingWitness> doubling_violation_witness(const SequenceMeasure& m,
                                                        const std::vector<double>& R_list) {
    return m.doubling_violation_witness(R_list);
}

}  // namespace regdim
