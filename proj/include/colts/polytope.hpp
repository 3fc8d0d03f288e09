#pragma once

#include "colts/linalg.hpp"

namespace colts {

/// {a : G a <= h, lower <= a <= upper}. Infinite bounds are allowed when G bounds
/// that coordinate.
struct Polytope {
    Mat G;
    Vec h;
    Vec lower;
    Vec upper;

    Eigen::Index dim() const { return lower.size(); }
    Eigen::Index num_rows() const { return G.rows(); }

    /// Largest violation over all rows and bounds (<= 0 inside).
    double max_violation(const Vec& a) const;
    bool contains(const Vec& a, double tol) const { return max_violation(a) <= tol; }

    /// [lo, hi]^dim with no general rows.
    static Polytope box(Eigen::Index dim, double lo, double hi);
};

}  // namespace colts
