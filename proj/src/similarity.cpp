#include "regdim/similarity.hpp"

#include <cmath>
#include <stdexcept>

namespace regdim {

namespace {

void check_orthogonal(const std::vector<double>& rot, std::size_t d) {
    // rows must be orthonormal: rot * rot^T = I within 1e-12
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += rot[i * d + k] * rot[j * d + k];
            const double want = i == j ? 1.0 : 0.0;
            if (std::fabs(s - want) > 1e-12)
                throw std::invalid_argument("rotation part is not orthogonal");
        }
    }
}

}  // namespace

SimilarityMap make_similarity(double ratio, std::vector<double> rot, std::vector<double> shift) {
    if (!(ratio > 0.0)) throw std::invalid_argument("similarity ratio must be positive");
    const std::size_t d = shift.size();
    if (d == 0) throw std::invalid_argument("similarity needs dimension >= 1");
    if (rot.size() != d * d) throw std::invalid_argument("rotation size mismatch");
    check_orthogonal(rot, d);
    return SimilarityMap{ratio, std::move(rot), std::move(shift)};
}

SimilarityMap make_similarity_1d(double ratio, double shift) {
    if (ratio == 0.0) throw std::invalid_argument("similarity ratio must be nonzero");
    const double sign = ratio > 0.0 ? 1.0 : -1.0;
    return SimilarityMap{std::fabs(ratio), {sign}, {shift}};
}

Point apply_similarity(const SimilarityMap& m, const Point& x) {
    const std::size_t d = m.dim();
    if (x.dim() != d) throw std::invalid_argument("point dimension mismatch");
    Point y;
    y.coords.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += m.rot[i * d + k] * x.coords[k];
        y.coords[i] = m.ratio * s + m.shift[i];
    }
    return y;
}

SimilarityMap invert_similarity(const SimilarityMap& m) {
    const std::size_t d = m.dim();
    SimilarityMap inv;
    inv.ratio = 1.0 / m.ratio;
    inv.rot.resize(d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) inv.rot[i * d + j] = m.rot[j * d + i];
    inv.shift.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += inv.rot[i * d + k] * m.shift[k];
        inv.shift[i] = -inv.ratio * s;
    }
    return inv;
}

SimilarityMap compose(const SimilarityMap& a, const SimilarityMap& b) {
    const std::size_t d = a.dim();
    if (b.dim() != d) throw std::invalid_argument("similarity dimension mismatch");
    SimilarityMap c;
    c.ratio = a.ratio * b.ratio;
    c.rot.resize(d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += a.rot[i * d + k] * b.rot[k * d + j];
            c.rot[i * d + j] = s;
        }
    c.shift.resize(d);
    Point tb{b.shift};
    Point atb = apply_similarity(a, tb);
    c.shift = atb.coords;
    return c;
}

Point fixed_point(const SimilarityMap& m) {
    if (m.ratio == 1.0) throw std::domain_error("fixed point undefined for ratio 1");
    const std::size_t d = m.dim();
    // Gaussian elimination with partial pivoting on (I - ratio*rot) x = shift.
    std::vector<double> a(d * d);
    std::vector<double> b = m.shift;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            a[i * d + j] = (i == j ? 1.0 : 0.0) - m.ratio * m.rot[i * d + j];
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < d; ++r)
            if (std::fabs(a[r * d + col]) > std::fabs(a[piv * d + col])) piv = r;
        if (std::fabs(a[piv * d + col]) < 1e-300) throw std::domain_error("singular fixed point system");
        if (piv != col) {
            for (std::size_t j = 0; j < d; ++j) std::swap(a[piv * d + j], a[col * d + j]);
            std::swap(b[piv], b[col]);
        }
        for (std::size_t r = 0; r < d; ++r) {
            if (r == col) continue;
            const double f = a[r * d + col] / a[col * d + col];
            if (f == 0.0) continue;
            for (std::size_t j = col; j < d; ++j) a[r * d + j] -= f * a[col * d + j];
            b[r] -= f * b[col];
        }
    }
    Point x;
    x.coords.resize(d);
    for (std::size_t i = 0; i < d; ++i) x.coords[i] = b[i] / a[i * d + i];
    return x;
}

}  // namespace regdim
