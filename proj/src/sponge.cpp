#include "regdim/sponge.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
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

// relative band above an exact power that still counts as <= that power
const Rational& snap_bound() {
    static const Rational b =
        Rational(static_cast<unsigned long>((1UL << 49) + 1), static_cast<unsigned long>(1UL << 49));
    return b;
}

SpongeSystem finish_build(int d, std::vector<int> bases, std::vector<SpongeDigit> digits,
                          std::vector<Rational> probs) {
    if (d < 2) throw std::invalid_argument("sponge needs at least two axes");
    if (static_cast<int>(bases.size()) != d)
        throw std::invalid_argument("bases must have one entry per axis");
    for (int l = 0; l < d; ++l) {
        if (bases[l] < 2) throw std::invalid_argument("every base must exceed 1");
        if (l > 0 && bases[l] <= bases[l - 1])
            throw std::invalid_argument("bases must be strictly increasing");
    }
    if (digits.empty()) throw std::invalid_argument("digit set must be nonempty");
    if (digits.size() != probs.size())
        throw std::invalid_argument("need one probability per digit");
    for (const auto& dig : digits) {
        if (static_cast<int>(dig.size()) != d)
            throw std::invalid_argument("digit arity must match the axis count");
        for (int l = 0; l < d; ++l)
            if (dig[l] < 0 || dig[l] >= bases[l])
                throw std::invalid_argument("digit coordinate out of base range");
    }

    std::vector<std::size_t> order(digits.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return digits[a] < digits[b]; });

    SpongeSystem sys;
    sys.d = d;
    sys.bases = std::move(bases);
    for (std::size_t i : order) {
        if (!sys.digits.empty() && sys.digits.back() == digits[i])
            throw std::invalid_argument("duplicate digit");
        sys.digits.push_back(digits[i]);
        if (!(probs[i] > 0)) throw std::invalid_argument("probabilities must be positive");
        sys.probs.push_back(probs[i]);
    }

    const std::size_t n = sys.digits.size();
    sys.class_id.assign(static_cast<std::size_t>(d) + 1, std::vector<int>(n, 0));
    sys.class_mass.resize(static_cast<std::size_t>(d) + 1);
    sys.class_log.resize(static_cast<std::size_t>(d) + 1);
    for (int a = 0; a <= d; ++a) {
        std::vector<SpongeDigit> seen;
        for (std::size_t i = 0; i < n; ++i) {
            SpongeDigit pre(sys.digits[i].begin(), sys.digits[i].begin() + a);
            auto it = std::find(seen.begin(), seen.end(), pre);
            int id;
            if (it == seen.end()) {
                id = static_cast<int>(seen.size());
                seen.push_back(pre);
                sys.class_mass[a].push_back(Rational(0));
            } else {
                id = static_cast<int>(it - seen.begin());
            }
            sys.class_id[a][i] = id;
            sys.class_mass[a][id] += sys.probs[i];
        }
        for (const Rational& m : sys.class_mass[a])
            sys.class_log[a].push_back(std::log(to_double(m)));
    }

    sys.cond.assign(n, std::vector<Rational>(d));
    sys.cond_log.assign(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (int l = 1; l <= d; ++l) {
            sys.cond[i][l - 1] = sys.class_mass[l][sys.class_id[l][i]] /
                                 sys.class_mass[l - 1][sys.class_id[l - 1][i]];
            sys.cond_log[i][l - 1] = std::log(to_double(sys.cond[i][l - 1]));
        }
    return sys;
}

long depth_one(const Rational& r_exact, int base) {
    Rational cur = r_exact;
    long k = 0;
    for (;;) {
        cur *= base;
        if (cur <= snap_bound()) {
            if (++k > 1200) throw std::runtime_error("depth iteration ran away");
        } else {
            return k;
        }
    }
}

// per-axis log-mass sums to the given depths; the deeper sum extends the
// shallower one term by term, so deep <= shallow holds bitwise
double cube_log_at(const SpongeSystem& sys, const SymbolicPoint& omega,
                   const std::vector<long>& k) {
    double total = 0.0;
    for (int l = 0; l < sys.d; ++l) {
        double s = 0.0;
        for (long t = 1; t <= k[l]; ++t) s += sys.cond_log[omega.digit_at(t)][l];
        total += s;
    }
    return total;
}

int arg_min_cond(const SpongeSystem& sys, int l) {
    int best = 0;
    for (std::size_t i = 1; i < sys.digits.size(); ++i)
        if (sys.cond[i][l] < sys.cond[best][l]) best = static_cast<int>(i);
    return best;
}

}  // namespace

SpongeSystem build_sponge(int d, std::vector<int> bases, std::vector<SpongeDigit> digits,
                          std::vector<double> probs) {
    double sum = 0.0;
    std::vector<Rational> fracs;
    fracs.reserve(probs.size());
    for (double p : probs) {
        if (!(p > 0.0)) throw std::invalid_argument("probabilities must be positive");
        sum += p;
        fracs.push_back(rational_from_double(p));
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("probabilities must sum to 1");
    return finish_build(d, std::move(bases), std::move(digits), std::move(fracs));
}

SpongeSystem build_sponge(int d, std::vector<int> bases, std::vector<SpongeDigit> digits,
                          std::vector<Rational> probs) {
    Rational sum(0);
    for (const Rational& p : probs) sum += p;
    if (sum != 1) throw std::invalid_argument("probabilities must sum to 1");
    return finish_build(d, std::move(bases), std::move(digits), std::move(probs));
}

SymbolicPoint make_symbolic(const SpongeSystem& sys, const std::vector<SpongeDigit>& preperiod,
                            const std::vector<SpongeDigit>& period) {
    if (period.empty()) throw std::invalid_argument("period must be nonempty");
    auto resolve = [&sys](const SpongeDigit& dig) {
        auto it = std::lower_bound(sys.digits.begin(), sys.digits.end(), dig);
        if (it == sys.digits.end() || *it != dig)
            throw std::invalid_argument("digit tuple is not in the digit set");
        return static_cast<int>(it - sys.digits.begin());
    };
    SymbolicPoint out;
    for (const auto& dig : preperiod) out.preperiod.push_back(resolve(dig));
    for (const auto& dig : period) out.period.push_back(resolve(dig));
    return out;
}

bool check_vssc(const SpongeSystem& sys) {
    for (std::size_t i = 0; i < sys.digits.size(); ++i)
        for (std::size_t j = i + 1; j < sys.digits.size(); ++j)
            for (int l = 0; l < sys.d; ++l) {
                if (sys.digits[i][l] == sys.digits[j][l]) continue;
                if (std::abs(sys.digits[i][l] - sys.digits[j][l]) <= 1) return false;
                break;
            }
    return true;
}

DepthVector depth_vector(const SpongeSystem& sys, double r) {
    if (!std::isfinite(r) || !(r > 0.0)) throw std::invalid_argument("radius must be positive");
    const Rational r_exact = rational_from_double(r);
    if (!(r_exact <= snap_bound())) throw std::invalid_argument("radius must be at most 1");
    DepthVector dv;
    for (int b : sys.bases) dv.k.push_back(depth_one(r_exact, b));
    return dv;
}

double approx_cube_mass_log(const SpongeSystem& sys, const SymbolicPoint& omega, double r) {
    return cube_log_at(sys, omega, depth_vector(sys, r).k);
}

Rational approx_cube_mass_exact(const SpongeSystem& sys, const SymbolicPoint& omega, double r) {
    const DepthVector dv = depth_vector(sys, r);
    Rational m(1);
    for (int l = 0; l < sys.d; ++l)
        for (long t = 1; t <= dv.k[l]; ++t) m *= sys.cond[omega.digit_at(t)][l];
    return m;
}

double approx_cube_mass(const SpongeSystem& sys, const SymbolicPoint& omega, double r) {
    return std::exp(approx_cube_mass_log(sys, omega, r));
}

MassInterval ball_mass_sponge(const SpongeSystem& sys, const SymbolicPoint& omega, double r) {
    if (!check_vssc(sys))
        throw std::domain_error("ball-mass sandwich requires the very strong separation condition");
    if (!std::isfinite(r) || !(r > 0.0)) throw std::invalid_argument("radius must be positive");
    const double sum_n = std::accumulate(sys.bases.begin(), sys.bases.end(), 0.0);
    const double lo_r = std::min(1.0, r / (sys.bases[0] * sum_n));
    const double hi_r = std::min(1.0, 2.0 * sys.bases[0] * r);
    const double lo_log = cube_log_at(sys, omega, depth_vector(sys, lo_r).k);
    const double hi_log = cube_log_at(sys, omega, depth_vector(sys, hi_r).k);
    return MassInterval::from_log(lo_log, hi_log);
}

double dim_reg_formula_sponge(const SpongeSystem& sys) {
    if (!check_vssc(sys))
        throw std::domain_error("formula requires the very strong separation condition");
    double total = 0.0;
    for (int l = 0; l < sys.d; ++l)
        total += -sys.cond_log[arg_min_cond(sys, l)][l] / std::log(sys.bases[l]);
    return total;
}

SymbolicPoint extremal_code(const SpongeSystem& sys, double r, double R) {
    if (!std::isfinite(r) || !std::isfinite(R) || !(r > 0.0) || !(R > 0.0))
        throw std::invalid_argument("scales must be positive");
    if (!(R <= 1.0)) throw std::invalid_argument("coarse scale R must be at most 1");
    const int d = sys.d;
    if (!(r < R / sys.bases[d - 1])) {
        std::ostringstream os;
        os << "scale separation violated: need r < R/n_d, got r=" << r
           << " with R/n_d=" << R / sys.bases[d - 1];
        throw std::invalid_argument(os.str());
    }
    for (int l = 0; l + 1 < d; ++l) {
        const double lhs_log =
            (std::log(sys.bases[l]) + std::log(R)) * (std::log(sys.bases[l + 1]) / std::log(sys.bases[l]));
        if (!(lhs_log < std::log(r))) {
            std::ostringstream os;
            os << "scale separation violated: need (n_" << l + 1 << " R)^(log n_" << l + 2
               << "/log n_" << l + 1 << ") < r, got exp(" << lhs_log << ") vs r=" << r;
            throw std::invalid_argument(os.str());
        }
    }
    const DepthVector kR = depth_vector(sys, R);
    const DepthVector kr = depth_vector(sys, r);
    for (int l = d - 1; l >= 0; --l) {
        const bool ok = kR.k[l] < kr.k[l] && (l == 0 || kr.k[l] < kR.k[l - 1]);
        if (!ok)
            throw std::invalid_argument(
                "scale separation violated: depth vectors do not interleave");
    }

    std::vector<int> word(static_cast<std::size_t>(kr.k[0]), 0);
    for (int l = 0; l < d; ++l) {
        const int im = arg_min_cond(sys, l);
        for (long t = kR.k[l] + 1; t <= kr.k[l]; ++t) word[t - 1] = im;
    }
    return SymbolicPoint{std::move(word), {0}};
}

Point point_of(const SpongeSystem& sys, const SymbolicPoint& omega) {
    Point p;
    p.coords.assign(sys.d, 0.0);
    const long pre = static_cast<long>(omega.preperiod.size());
    const long per = static_cast<long>(omega.period.size());
    // exact rational sums, rounded once per axis: emitted coordinates then
    // agree bitwise with clean double literals like 1.0/3.0
    for (int l = 0; l < sys.d; ++l) {
        const int n = sys.bases[l];
        Rational x(0), scale(1);
        for (long t = 1; t <= pre; ++t) {
            scale /= n;
            x += scale * sys.digits[omega.preperiod[t - 1]][l];
        }
        Rational per_sum(0), ps(1);
        for (long s = 0; s < per; ++s) {
            ps /= n;
            per_sum += ps * sys.digits[omega.period[s]][l];
        }
        x += scale * per_sum / (Rational(1) - ps);
        p.coords[l] = to_double(x);
    }
    return p;
}

BadCarpetCurves badcarpet_family(double epsilon) {
    if (!std::isfinite(epsilon) || !(epsilon > 0.0) || epsilon > 0.5)
        throw std::invalid_argument("epsilon must lie in (0, 1/2]");
    const double l3 = std::log(3.0), l4 = std::log(4.0);
    BadCarpetCurves c;
    c.dim_reg = -std::log(epsilon) / l3 + -std::log((epsilon / 2.0) / (1.0 - epsilon)) / l4;
    c.dim_assouad = std::log(2.0) / l3 + std::log(2.0) / l4;
    const double branch_corner = -std::log(epsilon) / l3;
    const double branch_column =
        -std::log(1.0 - epsilon) / l3 + -std::log((epsilon / 2.0) / (1.0 - epsilon)) / l4;
    c.sup_local = std::max(branch_corner, branch_column);
    c.top_spectrum = -std::log(epsilon) / l3 + std::log(2.0) / l4;
    return c;
}

SpongeSystem make_badcarpet_system(double epsilon) {
    if (!std::isfinite(epsilon) || !(epsilon > 0.0) || epsilon > 0.5)
        throw std::invalid_argument("epsilon must lie in (0, 1/2]");
    return build_sponge(2, {3, 4}, {{0, 2}, {2, 1}, {2, 3}},
                        std::vector<double>{epsilon, 1.0 - 1.5 * epsilon, 0.5 * epsilon});
}

SpongeModel::SpongeModel(SpongeSystem sys, MassMode mode) : sys_(std::move(sys)), mode_(mode) {
    if (!check_vssc(sys_))
        throw std::domain_error("sponge model requires the very strong separation condition");
}

int SpongeModel::ambient_dim() const { return sys_.d; }

std::optional<SymbolicPoint> SpongeModel::resolve(const Point& x) const {
    {
        std::lock_guard<std::mutex> lock(registry_mutex_);
        auto it = registry_.find(x.coords);
        if (it != registry_.end()) return it->second;
    }
    // greedy digit extraction on the exact binary value; enough depth for
    // any radius a double can represent
    std::vector<Rational> rem(sys_.d);
    for (int l = 0; l < sys_.d; ++l) {
        rem[l] = rational_from_double(x.coords[l]);
        if (rem[l] < 0 || rem[l] > 1) return std::nullopt;
    }
    const long max_depth = 1100;
    std::vector<int> word;
    for (long t = 1; t <= max_depth; ++t) {
        std::vector<Rational> v(sys_.d);
        SpongeDigit dig(sys_.d);
        // axes sitting on an interior cell boundary: digit c (remainder 0)
        // or c-1 (right endpoint, remainder 1) are both geometrically valid
        std::vector<int> split_axes;
        for (int l = 0; l < sys_.d; ++l) {
            v[l] = rem[l] * sys_.bases[l];
            const bool integral = v[l].get_den() == 1;
            const mpz_class whole = v[l].get_num() / v[l].get_den();
            int c = static_cast<int>(whole.get_si());
            if (integral && c == sys_.bases[l])
                c -= 1;  // right edge of the unit cell: only c-1 works
            else if (integral && c >= 1)
                split_axes.push_back(l);
            dig[l] = c;
        }
        auto find_digit = [this](const SpongeDigit& dg) -> int {
            auto it = std::lower_bound(sys_.digits.begin(), sys_.digits.end(), dg);
            if (it != sys_.digits.end() && *it == dg)
                return static_cast<int>(it - sys_.digits.begin());
            return -1;
        };
        int idx = find_digit(dig);
        if (idx < 0) {
            // under the separation condition at most one digit choice can
            // continue, so trying boundary subsets needs no backtracking
            const int m = static_cast<int>(split_axes.size());
            for (int mask = 1; mask < (1 << m) && idx < 0; ++mask) {
                SpongeDigit alt = dig;
                for (int b = 0; b < m; ++b)
                    if (mask & (1 << b)) alt[split_axes[b]] -= 1;
                idx = find_digit(alt);
                if (idx >= 0) dig = alt;
            }
        }
        // left the digit set: the coordinates are not a support point
        if (idx < 0) return std::nullopt;
        word.push_back(idx);
        bool all_zero = true;
        for (int l = 0; l < sys_.d; ++l) {
            rem[l] = v[l] - dig[l];
            if (rem[l] != 0) all_zero = false;
        }
        if (all_zero) {
            // terminating expansion: valid only if the all-zero digit exists
            // (it is the lexicographic minimum, hence index 0 when present)
            const SpongeDigit zero(static_cast<std::size_t>(sys_.d), 0);
            if (sys_.digits.front() != zero) return std::nullopt;
            return SymbolicPoint{std::move(word), {0}};
        }
    }
    // positions beyond max_depth are unreachable by any double radius
    return SymbolicPoint{std::move(word), {word.back()}};
}

MassInterval SpongeModel::ball_mass(const Point& x, double r, double tol) const {
    (void)tol;  // cube masses are exact; the sandwich width is structural
    if (static_cast<int>(x.dim()) != sys_.d)
        throw std::invalid_argument("point dimension mismatch");
    if (!std::isfinite(r) || !(r > 0.0)) throw std::invalid_argument("radius must be positive");
    auto code = resolve(x);
    if (!code) throw NoDataError("point has no digit code in this system");
    if (mode_ == MassMode::Sandwich) return ball_mass_sponge(sys_, *code, r);
    return MassInterval::exact_log(approx_cube_mass_log(sys_, *code, std::min(r, 1.0)));
}

std::vector<Point> SpongeModel::support_net(double scale) const {
    if (!std::isfinite(scale) || !(scale > 0.0))
        throw std::invalid_argument("net scale must be positive");
    const DepthVector dv = depth_vector(sys_, std::min(scale, 1.0));
    const int d = sys_.d;

    double log_count = 0.0;
    for (int a = 1; a <= d; ++a) {
        const long next = a < d ? dv.k[a] : 0;
        log_count += static_cast<double>(dv.k[a - 1] - next) * std::log(sys_.class_count(a));
    }
    if (log_count > 22.0 * std::log(2.0)) throw std::invalid_argument("net scale too fine");

    // first digit realising each class, per prefix length
    std::vector<std::vector<int>> rep(static_cast<std::size_t>(d) + 1);
    for (int a = 0; a <= d; ++a) {
        rep[a].assign(sys_.class_mass[a].size(), -1);
        for (std::size_t i = 0; i < sys_.digits.size(); ++i)
            if (rep[a][sys_.class_id[a][i]] < 0) rep[a][sys_.class_id[a][i]] = static_cast<int>(i);
    }

    // one representative per depth cube: the support point whose code is the
    // cube word followed by the smallest digit (registered for mass queries)
    std::vector<Point> net;
    std::vector<int> word;
    std::function<void(long)> rec = [&](long t) {
        if (t > dv.k[0]) {
            net.push_back(register_code(SymbolicPoint{word, {0}}));
            return;
        }
        int active = 0;
        while (active < d && dv.k[active] >= t) ++active;
        for (int cls = 0; cls < sys_.class_count(active); ++cls) {
            word.push_back(rep[active][cls]);
            rec(t + 1);
            word.pop_back();
        }
    };
    rec(1);
    return net;
}

std::vector<Point> SpongeModel::witnesses() const {
    std::vector<Point> out;
    const int n = static_cast<int>(sys_.branch_count());
    for (int i = 0; i < n; ++i) out.push_back(register_code(SymbolicPoint{{}, {i}}));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            out.push_back(register_code(SymbolicPoint{{}, {i, j}}));
            out.push_back(register_code(SymbolicPoint{{i}, {j}}));
        }
    return out;
}

Point SpongeModel::register_code(const SymbolicPoint& omega) const {
    if (omega.period.empty()) throw std::invalid_argument("period must be nonempty");
    auto check = [this](int idx) {
        if (idx < 0 || idx >= static_cast<int>(sys_.branch_count()))
            throw std::invalid_argument("digit index out of range");
    };
    for (int idx : omega.preperiod) check(idx);
    for (int idx : omega.period) check(idx);
    Point p = point_of(sys_, omega);
    std::lock_guard<std::mutex> lock(registry_mutex_);
    registry_[p.coords] = omega;
    return p;
}

std::optional<double> SpongeModel::log_packing_moment(double r, double q) const {
    if (!std::isfinite(r) || !(r > 0.0)) throw std::invalid_argument("radius must be positive");
    if (!std::isfinite(q)) throw std::invalid_argument("q must be finite");
    const DepthVector dv = depth_vector(sys_, std::min(r, 1.0));
    double total = 0.0;
    for (int a = 1; a <= sys_.d; ++a) {
        std::vector<double> terms;
        terms.reserve(sys_.class_log[a].size());
        for (double lm : sys_.class_log[a]) terms.push_back(q * lm);
        const long next = a < sys_.d ? dv.k[a] : 0;
        total += static_cast<double>(dv.k[a - 1] - next) * logsumexp(terms);
    }
    return total;
}

std::optional<double> SpongeModel::log_covering_count(const Point& x, double R, double r) const {
    if (static_cast<int>(x.dim()) != sys_.d)
        throw std::invalid_argument("point dimension mismatch");
    if (!std::isfinite(r) || !std::isfinite(R) || !(r > 0.0) || !(R > 0.0) || r > R)
        throw std::invalid_argument("need 0 < r <= R");
    const DepthVector kR = depth_vector(sys_, std::min(R, 1.0));
    const DepthVector kr = depth_vector(sys_, std::min(r, 1.0));
    auto code = resolve(x);
    if (!code) return std::nullopt;

    // choices per position: distinct fine-prefix classes among digits
    // matching the pinned coarse prefix of the code
    double log_n = 0.0;
    for (long t = 1; t <= kr.k[0]; ++t) {
        int aR = 0, ar = 0;
        while (aR < sys_.d && kR.k[aR] >= t) ++aR;
        while (ar < sys_.d && kr.k[ar] >= t) ++ar;
        const int cls = sys_.class_id[aR][code->digit_at(t)];
        std::vector<char> seen(sys_.class_mass[ar].size(), 0);
        int choices = 0;
        for (std::size_t i = 0; i < sys_.digits.size(); ++i) {
            if (sys_.class_id[aR][i] != cls) continue;
            if (!seen[sys_.class_id[ar][i]]) {
                seen[sys_.class_id[ar][i]] = 1;
                ++choices;
            }
        }
        log_n += std::log(static_cast<double>(choices));
    }
    return log_n;
}

}  // namespace regdim
