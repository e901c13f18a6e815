#include "regdim/rational.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace regdim {

Rational parse_rational(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    try {
        Rational r(s);  // handles "a" and "a/b"
        if (r.get_den() == 0) throw std::invalid_argument("zero denominator");
        r.canonicalize();
        return r;
    } catch (const std::invalid_argument&) {
        throw;
    } catch (...) {
        throw std::invalid_argument("bad rational literal: " + text);
    }
}

Rational rational_from_double(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("rational_from_double needs finite input");
    Rational r;
    mpq_set_d(r.get_mpq_t(), v);
    return r;
}

double to_double(const Rational& r) {
    // mpq_get_d truncates toward zero; round to nearest (ties to even) so
    // that exact coordinates round-trip bitwise against double literals
    const double lo = r.get_d();
    if (!std::isfinite(lo)) return lo;
    const Rational vlo = rational_from_double(lo);
    if (vlo == r) return lo;
    const double dir = r > vlo ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
    const double hi = std::nextafter(lo, dir);
    if (!std::isfinite(hi)) return lo;
    const Rational gap = r * 2 - (vlo + rational_from_double(hi));
    const int side = sgn(gap);
    if (side < 0) return lo;
    if (side > 0) return hi;
    return (std::bit_cast<std::uint64_t>(lo) & 1u) == 0 ? lo : hi;
}

std::string rational_str(const Rational& r) { return r.get_str(); }

}  // namespace regdim
