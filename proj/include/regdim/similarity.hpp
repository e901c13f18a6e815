#ifndef REGDIM_SIMILARITY_HPP
#define REGDIM_SIMILARITY_HPP

#include <vector>

#include "regdim/point.hpp"

namespace regdim {

// x |-> ratio * rot * x + shift, with rot orthogonal (row-major d x d).
// ratio is any positive real; inverses of contractions have ratio > 1.
struct SimilarityMap {
    double ratio = 1.0;
    std::vector<double> rot;
    std::vector<double> shift;

    std::size_t dim() const { return shift.size(); }
};

// Validates shape, ratio > 0 and orthogonality of rot (within 1e-12).
SimilarityMap make_similarity(double ratio, std::vector<double> rot, std::vector<double> shift);

// 1-d convenience: x |-> ratio * x + shift with ratio != 0 (sign folds into rot).
SimilarityMap make_similarity_1d(double ratio, double shift);

Point apply_similarity(const SimilarityMap& m, const Point& x);

// Exact inverse: ratio' = 1/ratio, rot' = rot^T, shift' = -(1/ratio) rot^T shift.
SimilarityMap invert_similarity(const SimilarityMap& m);

// (a o b)(x) = a(b(x)).
SimilarityMap compose(const SimilarityMap& a, const SimilarityMap& b);

// Unique fixed point of a map with ratio != 1, by solving (I - ratio*rot) x = shift.
Point fixed_point(const SimilarityMap& m);

}  // namespace regdim

#endif
