#ifndef REGDIM_SCALE_GRID_HPP
#define REGDIM_SCALE_GRID_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

namespace regdim {

// Geometric grid of radii base^-j, j in [exp_min, exp_max], together with the
// admissible (r, R) pairs: R = base^-i, r = base^-(i+g), g in [gap_min, gap_max].
struct ScaleGrid {
    double base = 2.0;
    int exp_min = 2;
    int exp_max = 26;
    int gap_min = 8;
    int gap_max = 24;

    ScaleGrid() = default;
    ScaleGrid(double base_, int exp_min_, int exp_max_, int gap_min_, int gap_max_)
        : base(base_), exp_min(exp_min_), exp_max(exp_max_), gap_min(gap_min_), gap_max(gap_max_) {
        validate();
    }

    void validate() const {
        if (!(base > 1.0)) throw std::invalid_argument("grid base must exceed 1");
        if (exp_min >= exp_max) throw std::invalid_argument("grid needs exp_min < exp_max");
        if (gap_min < 1 || gap_max < gap_min)
            throw std::invalid_argument("grid needs 1 <= gap_min <= gap_max");
        if (gap_max > exp_max - exp_min)
            throw std::invalid_argument("grid gap_max exceeds exponent range");
    }

    double radius(int j) const { return std::pow(base, -static_cast<double>(j)); }

    std::vector<double> radii() const {
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(exp_max - exp_min + 1));
        for (int j = exp_min; j <= exp_max; ++j) out.push_back(radius(j));
        return out;
    }

    struct Pair {
        int exp_R;  // R = base^-exp_R
        int gap;    // r = base^-(exp_R + gap)
    };

    std::vector<Pair> pairs() const {
        std::vector<Pair> out;
        for (int g = gap_min; g <= gap_max; ++g)
            for (int i = exp_min; i + g <= exp_max; ++i) out.push_back(Pair{i, g});
        return out;
    }
};

}  // namespace regdim

#endif
