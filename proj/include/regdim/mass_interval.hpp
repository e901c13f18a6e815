#ifndef REGDIM_MASS_INTERVAL_HPP
#define REGDIM_MASS_INTERVAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace regdim {

// Certified enclosure [lo, hi] of a nonnegative mass.
//
// Ends are stored in log scale so that deep-scale queries (masses far below
// the smallest positive double) remain meaningful; lo()/hi() convert back and
// may underflow to 0, which is fine for display but estimators should prefer
// the log accessors.
class MassInterval {
public:
    MassInterval() = default;

    MassInterval(double lo, double hi) {
        if (!(lo >= 0.0) || !(hi >= lo))
            throw std::invalid_argument("mass interval requires 0 <= lo <= hi");
        log_lo_ = lo > 0.0 ? std::log(lo) : -inf();
        log_hi_ = hi > 0.0 ? std::log(hi) : -inf();
    }

    static MassInterval from_log(double log_lo, double log_hi) {
        if (std::isnan(log_lo) || std::isnan(log_hi) || log_lo > log_hi)
            throw std::invalid_argument("mass interval requires log_lo <= log_hi");
        MassInterval m;
        m.log_lo_ = log_lo;
        m.log_hi_ = log_hi;
        return m;
    }

    static MassInterval exact(double v) { return MassInterval(v, v); }
    static MassInterval exact_log(double lv) { return from_log(lv, lv); }
    static MassInterval zero() { return MassInterval(); }

    double lo() const { return std::exp(log_lo_); }
    double hi() const { return std::exp(log_hi_); }
    double log_lo() const { return log_lo_; }
    double log_hi() const { return log_hi_; }

    bool is_zero() const { return log_hi_ == -inf(); }
    double width() const { return hi() - lo(); }

    bool contains(double v) const {
        if (v < 0.0) return false;
        const double lv = v > 0.0 ? std::log(v) : -inf();
        return log_lo_ <= lv && lv <= log_hi_;
    }

    bool overlaps(const MassInterval& o) const {
        return log_lo_ <= o.log_hi_ && o.log_lo_ <= log_hi_;
    }

    // Outward-rounded interval sum (linear scale).
    MassInterval operator+(const MassInterval& o) const {
        return MassInterval(lo() + o.lo(), hi() + o.hi());
    }

    // Scale by a positive constant, exactly in log scale.
    MassInterval scaled(double factor) const {
        if (!(factor > 0.0)) throw std::invalid_argument("scale factor must be positive");
        const double lf = std::log(factor);
        return from_log(log_lo_ + lf, log_hi_ + lf);
    }

    // Outward-rounded division by a positive interval (e.g. a normalizer).
    MassInterval divided_by(const MassInterval& den) const {
        if (den.log_lo_ == -inf()) throw std::domain_error("division by interval touching zero");
        return from_log(log_lo_ - den.log_hi_, log_hi_ - den.log_lo_);
    }

    static double inf() { return std::numeric_limits<double>::infinity(); }

private:
    double log_lo_ = -std::numeric_limits<double>::infinity();
    double log_hi_ = -std::numeric_limits<double>::infinity();
};

}  // namespace regdim

#endif
