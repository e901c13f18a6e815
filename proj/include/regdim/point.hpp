#ifndef REGDIM_POINT_HPP
#define REGDIM_POINT_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace regdim {

struct Point {
    std::vector<double> coords;

    Point() = default;
    explicit Point(std::vector<double> c) : coords(std::move(c)) {}
    Point(std::initializer_list<double> c) : coords(c) {}

    std::size_t dim() const { return coords.size(); }
    double operator[](std::size_t i) const { return coords[i]; }
    double& operator[](std::size_t i) { return coords[i]; }

    bool operator==(const Point& o) const { return coords == o.coords; }
};

inline double dist2(const Point& a, const Point& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("point dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        const double d = a.coords[i] - b.coords[i];
        s += d * d;
    }
    return s;
}

inline double dist(const Point& a, const Point& b) { return std::sqrt(dist2(a, b)); }

inline double norm(const Point& a) {
    double s = 0.0;
    for (double c : a.coords) s += c * c;
    return std::sqrt(s);
}

inline std::string format_point(const Point& p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.dim(); ++i) {
        if (i) s += ' ';
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", p.coords[i]);
        s += buf;
    }
    s += ')';
    return s;
}

}  // namespace regdim

#endif
