#include "regdim/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "regdim/parallel.hpp"

namespace regdim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// a slot is empty when the model has no data for that point at all
// (distinct from a zero-mass interval, which still carries information)
std::vector<std::vector<std::optional<MassInterval>>> mass_table(
    const MeasureModel& model, const std::vector<Point>& xs, const std::vector<double>& radii,
    double tol, int threads) {
    std::vector<std::vector<std::optional<MassInterval>>> table(
        xs.size(), std::vector<std::optional<MassInterval>>(radii.size()));
    parallel_for(xs.size() * radii.size(), threads, [&](std::size_t k) {
        const std::size_t a = k / radii.size();
        const std::size_t b = k % radii.size();
        try {
            table[a][b] = model.ball_mass(xs[a], radii[b], tol);
        } catch (const NoDataError&) {
            table[a][b] = std::nullopt;
        }
    });
    return table;
}

double logsumexp(const std::vector<double>& v) {
    double m = kNegInf;
    for (double x : v) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

// log of the greedy packing sum; shared by packing_sum and estimate_tau
double log_packing_sum_impl(const MeasureModel& model, double r, double q,
                            double net_scale_factor, const EstimatorOptions& opts) {
    if (!(r > 0.0)) throw std::invalid_argument("packing radius must be positive");
    if (!(net_scale_factor > 0.0))
        throw std::invalid_argument("net scale factor must be positive");
    const std::vector<Point> net = model.support_net(r * net_scale_factor);
    if (net.empty()) throw NoDataError("support net is empty");

    std::vector<MassInterval> masses(net.size(), MassInterval::zero());
    parallel_for(net.size(), opts.threads, [&](std::size_t i) {
        try {
            masses[i] = model.ball_mass(net[i], r, opts.mass_tol);
        } catch (const NoDataError&) {
            // unresolvable net point: treated like a zero-mass candidate
        }
    });

    // term per ball: the interval end that understates mass^q, so the total
    // is a certified lower bound of the supremum over packings
    std::vector<std::size_t> order;
    order.reserve(net.size());
    std::vector<double> term_log(net.size(), kNegInf);
    for (std::size_t i = 0; i < net.size(); ++i) {
        const double end_log = q < 0.0 ? masses[i].log_hi() : masses[i].log_lo();
        // zero-mass candidates are net slack (the r-ball misses the support);
        // they are not admissible packing centers
        if (masses[i].log_hi() == kNegInf || end_log == kNegInf) continue;
        term_log[i] = q * end_log;
        order.push_back(i);
    }
    if (order.empty()) throw NoDataError("no positive-mass packing candidates");
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ma = masses[a].log_hi(), mb = masses[b].log_hi();
        return q < 0.0 ? ma < mb : ma > mb;
    });

    std::vector<std::size_t> picked;
    std::vector<double> terms;
    for (std::size_t i : order) {
        bool ok = true;
        for (std::size_t j : picked)
            if (dist(net[i], net[j]) <= 2.0 * r) {
                ok = false;
                break;
            }
        if (!ok) continue;
        picked.push_back(i);
        terms.push_back(term_log[i]);
    }
    return logsumexp(terms);
}

TauFit fit_slope(const std::vector<double>& t, const std::vector<double>& y) {
    const std::size_t n = t.size();
    double tm = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(n);
    double ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (t[i] - tm) * (y[i] - ym);
        den += (t[i] - tm) * (t[i] - tm);
    }
    TauFit fit;
    fit.tau_hat = num / den;
    const double intercept = ym - fit.tau_hat * tm;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (intercept + fit.tau_hat * t[i]);
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / static_cast<double>(n));
    return fit;
}

}  // namespace

DimEstimate estimate_upper_regularity(const MeasureModel& model, const ScaleGrid& grid,
                                      const std::vector<Point>& sample_points, double tol,
                                      const EstimatorOptions& opts) {
    grid.validate();
    if (sample_points.empty()) throw std::invalid_argument("sample_points must be nonempty");
    const std::vector<double> radii = grid.radii();
    const auto table = mass_table(model, sample_points, radii, tol, opts.threads);
    const double log_b = std::log(grid.base);

    DimEstimate est;
    est.conservative = true;
    double best = kNegInf;
    for (int g = grid.gap_min; g <= grid.gap_max; ++g) {
        double sup_g = kNegInf;
        for (int i = grid.exp_min; i + g <= grid.exp_max; ++i) {
            const std::size_t iR = static_cast<std::size_t>(i - grid.exp_min);
            const std::size_t ir = iR + static_cast<std::size_t>(g);
            for (std::size_t a = 0; a < sample_points.size(); ++a) {
                if (!table[a][iR] || !table[a][ir]) {
                    ++est.skipped;
                    continue;
                }
                const double num = table[a][iR]->log_lo();
                const double den = table[a][ir]->log_hi();
                // zero interval ends leave the log-ratio undefined: skip + tally
                if (num == kNegInf || den == kNegInf) {
                    ++est.skipped;
                    continue;
                }
                const double e = (num - den) / (static_cast<double>(g) * log_b);
                sup_g = std::max(sup_g, e);
                if (e > best) {
                    best = e;
                    est.witness_x = sample_points[a];
                    est.witness_R = radii[iR];
                    est.witness_r = radii[ir];
                }
            }
        }
        est.gap_curve.emplace_back(g, sup_g);
    }
    if (best == kNegInf) throw NoDataError("every radius pair had a zero-mass interval end");
    est.value = best;
    return est;
}

double estimate_local_dim_upper(const MeasureModel& model, const Point& x, const ScaleGrid& grid,
                                const EstimatorOptions& opts) {
    grid.validate();
    const std::vector<double> radii = grid.radii();
    const std::size_t n = radii.size();
    const std::size_t count = std::max<std::size_t>(1, n / 4);
    std::vector<double> small(radii.end() - static_cast<std::ptrdiff_t>(count), radii.end());
    std::vector<MassInterval> masses(small.size());
    parallel_for(small.size(), opts.threads,
                 [&](std::size_t i) { masses[i] = model.ball_mass(x, small[i], opts.mass_tol); });
    double best = kNegInf;
    for (std::size_t i = 0; i < small.size(); ++i) {
        if (masses[i].log_hi() == kNegInf)
            throw NoDataError("zero ball mass: point not in the support");
        best = std::max(best, masses[i].log_hi() / std::log(small[i]));
    }
    return best;
}

double log_doubling_constant(const MeasureModel& model, double theta, const ScaleGrid& grid,
                             const std::vector<Point>& sample_points,
                             const EstimatorOptions& opts) {
    if (!(theta > 0.0) || !(theta < 1.0))
        throw std::invalid_argument("theta must lie in (0,1)");
    grid.validate();
    if (sample_points.empty()) throw std::invalid_argument("sample_points must be nonempty");
    std::vector<double> radii = grid.radii();
    const std::size_t n = radii.size();
    radii.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) radii.push_back(radii[i] * theta);
    const auto table = mass_table(model, sample_points, radii, opts.mass_tol, opts.threads);

    double best = kNegInf;
    for (std::size_t a = 0; a < sample_points.size(); ++a)
        for (std::size_t i = 0; i < n; ++i) {
            if (!table[a][i] || !table[a][n + i]) continue;
            const double num = table[a][i]->log_hi();
            const double den = table[a][n + i]->log_lo();
            if (num == kNegInf || den == kNegInf) continue;
            best = std::max(best, num - den);
        }
    if (best == kNegInf) throw NoDataError("every (x, R) pair had a zero-mass interval end");
    return best;
}

double doubling_constant(const MeasureModel& model, double theta, const ScaleGrid& grid,
                         const std::vector<Point>& sample_points, const EstimatorOptions& opts) {
    return std::exp(log_doubling_constant(model, theta, grid, sample_points, opts));
}

double packing_sum(const MeasureModel& model, double r, double q, double net_scale_factor,
                   const EstimatorOptions& opts) {
    return std::exp(log_packing_sum_impl(model, r, q, net_scale_factor, opts));
}

TauFit estimate_tau(const MeasureModel& model, double q, const ScaleGrid& grid,
                    const EstimatorOptions& opts) {
    grid.validate();
    const std::vector<double> radii = grid.radii();
    if (radii.size() < 3) throw std::invalid_argument("tau fit needs at least 3 radii");

    std::vector<double> t(radii.size()), y(radii.size());
    bool hook_ok = true;
    for (std::size_t i = 0; i < radii.size() && hook_ok; ++i) {
        auto lm = model.log_packing_moment(radii[i], q);
        if (lm) {
            t[i] = std::log(radii[i]);
            y[i] = *lm;
        } else {
            hook_ok = false;
        }
    }
    if (!hook_ok) {
        // geometric fallback: same family for every radius, never mixed
        std::vector<double> logs(radii.size());
        parallel_for(radii.size(), opts.threads, [&](std::size_t i) {
            EstimatorOptions serial = opts;
            serial.threads = 1;
            logs[i] = log_packing_sum_impl(model, radii[i], q, 1.0, serial);
        });
        for (std::size_t i = 0; i < radii.size(); ++i) {
            t[i] = std::log(radii[i]);
            y[i] = logs[i];
        }
    }
    return fit_slope(t, y);
}

LqSpectrumEstimate estimate_T(const MeasureModel& model, const std::vector<double>& q_list,
                              const ScaleGrid& grid, const EstimatorOptions& opts) {
    if (q_list.empty()) throw std::invalid_argument("q_list must be nonempty");
    double q_star = 0.0;
    for (double q : q_list) q_star = std::min(q_star, q);
    if (!(q_star <= -10.0))
        throw std::invalid_argument("q_list needs a value <= -10 to pin the asymptote slope");
    LqSpectrumEstimate out;
    for (double q : q_list) {
        const TauFit fit = estimate_tau(model, q, grid, opts);
        out.points.push_back({q, fit.tau_hat, fit.residual});
        if (q == q_star) out.T_hat = fit.tau_hat / q;
    }
    return out;
}

double estimate_assouad_support(const MeasureModel& model, const ScaleGrid& grid,
                                const std::vector<Point>& sample_points,
                                const EstimatorOptions& opts) {
    grid.validate();
    if (sample_points.empty()) throw std::invalid_argument("sample_points must be nonempty");
    const auto pairs = grid.pairs();
    const double log_b = std::log(grid.base);

    struct Triple {
        std::size_t a;
        ScaleGrid::Pair p;
    };
    std::vector<Triple> triples;
    for (const auto& p : pairs)
        for (std::size_t a = 0; a < sample_points.size(); ++a) triples.push_back({a, p});

    std::vector<double> vals(triples.size(), kNegInf);
    std::vector<char> missing(triples.size(), 0);
    parallel_for(triples.size(), opts.threads, [&](std::size_t k) {
        const auto& tr = triples[k];
        const double R = std::pow(grid.base, -tr.p.exp_R);
        const double r = std::pow(grid.base, -(tr.p.exp_R + tr.p.gap));
        auto lc = model.log_covering_count(sample_points[tr.a], R, r);
        if (lc)
            vals[k] = *lc / (static_cast<double>(tr.p.gap) * log_b);
        else
            missing[k] = 1;
    });

    // geometric fallback for triples the hook declined: count net points in
    // the window, one net per distinct fine exponent
    std::map<int, std::vector<Point>> nets;
    bool net_overflow = false;
    for (std::size_t k = 0; k < triples.size(); ++k) {
        if (!missing[k]) continue;
        const auto& tr = triples[k];
        const int fine = tr.p.exp_R + tr.p.gap;
        auto it = nets.find(fine);
        if (it == nets.end()) {
            try {
                it = nets.emplace(fine, model.support_net(std::pow(grid.base, -fine))).first;
            } catch (const std::invalid_argument&) {
                net_overflow = true;
                continue;  // scale too fine to enumerate: triple is skipped
            }
        }
        const double R = std::pow(grid.base, -tr.p.exp_R);
        long long count = 0;
        for (const auto& pt : it->second)
            if (dist(pt, sample_points[tr.a]) < R) ++count;
        if (count > 0)
            vals[k] = std::log(static_cast<double>(count)) /
                      (static_cast<double>(tr.p.gap) * log_b);
    }
    (void)net_overflow;

    double best = kNegInf;
    for (double v : vals) best = std::max(best, v);
    if (best == kNegInf) throw NoDataError("no countable (x, R, r) triple");
    return best;
}

ChainReport verify_dimension_chain(const MeasureModel& model, const ScaleGrid& grid,
                                   const std::vector<Point>& sample_points,
                                   const EstimatorOptions& opts) {
    ChainReport rep;
    double sl = kNegInf;
    for (const auto& w : model.witnesses())
        sl = std::max(sl, estimate_local_dim_upper(model, w, grid, opts));
    rep.sup_local_hat = sl;
    rep.T_hat = estimate_T(model, {-1.0, -2.0, -5.0, -10.0, -20.0}, grid, opts).T_hat;
    rep.dimreg_hat =
        estimate_upper_regularity(model, grid, sample_points, opts.mass_tol, opts).value;
    rep.box_support_hat = -estimate_tau(model, 0.0, grid, opts).tau_hat;
    rep.assouad_support_hat = estimate_assouad_support(model, grid, sample_points, opts);

    auto check = [&rep](const char* name, double lhs, double rhs) {
        if (lhs > rhs + kChainTol)
            rep.violations.push_back({name, lhs, rhs, lhs - rhs});
    };
    check("sup_local<=T", rep.sup_local_hat, rep.T_hat);
    check("T<=dimreg", rep.T_hat, rep.dimreg_hat);
    check("box<=assouad", rep.box_support_hat, rep.assouad_support_hat);
    check("assouad<=dimreg", rep.assouad_support_hat, rep.dimreg_hat);
    return rep;
}

}  // namespace regdim
