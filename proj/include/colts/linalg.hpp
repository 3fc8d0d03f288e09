#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace colts {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense symmetric matrix. Entries are kept bit-exactly symmetric.
class SymMatrix {
public:
    SymMatrix() = default;

    /// Symmetrizes `m` as (m + m^T) / 2; throws DimensionError if not square.
    explicit SymMatrix(const Mat& m);

    static SymMatrix identity(Eigen::Index dim);
    static SymMatrix diagonal(const Vec& diag);

    Eigen::Index dim() const { return m_.rows(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
    const Mat& matrix() const { return m_; }

    double quadratic_form(const Vec& x) const;

private:
    Mat m_;
};

/// V + a a^T.
SymMatrix rank1_update(const SymMatrix& V, const Vec& a);

struct InverseRoots {
    SymMatrix inv;
    SymMatrix inv_sqrt;
    double log_det = 0.0;  // of the input
};

/// Eigenvalues at or below this are treated as singular.
inline constexpr double kEigenFloor = 1e-12;

/// (V^{-1}, V^{-1/2}, log det V) from one symmetric eigendecomposition.
InverseRoots inv_and_inv_sqrt(const SymMatrix& V);

/// log det V via eigenvalues; V must be positive definite.
double log_det(const SymMatrix& V);

/// ||a||_{V^{-1}} = sqrt(a^T V_inv a). Negative forms down to -1e-12 clamp to 0.
double mahalanobis(const Vec& a, const SymMatrix& V_inv);

}  // namespace colts
