#include "colts/linalg.hpp"

#include <cmath>

#include <fmt/core.h>

namespace colts {

SymMatrix::SymMatrix(const Mat& m) {
    if (m.rows() != m.cols()) {
        throw DimensionError(fmt::format("SymMatrix: {}x{} is not square", m.rows(), m.cols()));
    }
    m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index dim) {
    return SymMatrix(Mat::Identity(dim, dim));
}

SymMatrix SymMatrix::diagonal(const Vec& diag) {
    return SymMatrix(Mat(diag.asDiagonal()));
}

double SymMatrix::quadratic_form(const Vec& x) const {
    if (x.size() != dim()) {
        throw DimensionError(fmt::format("quadratic_form: dim {} vs vector {}", dim(), x.size()));
    }
    return x.dot(m_ * x);
}

SymMatrix rank1_update(const SymMatrix& V, const Vec& a) {
    if (a.size() != V.dim()) {
        throw DimensionError(fmt::format("rank1_update: dim {} vs vector {}", V.dim(), a.size()));
    }
    // a_i * a_j == a_j * a_i in IEEE arithmetic, so the sum stays exactly symmetric.
    Mat m = V.matrix();
    m.noalias() += a * a.transpose();
    return SymMatrix(m);
}

namespace {

Eigen::SelfAdjointEigenSolver<Mat> checked_eigen(const SymMatrix& V, const char* what) {
    Eigen::SelfAdjointEigenSolver<Mat> es(V.matrix());
    if (es.info() != Eigen::Success) {
        throw SingularMatrixError(fmt::format("{}: eigendecomposition failed", what));
    }
    const double lo = es.eigenvalues().minCoeff();
    if (!(lo > kEigenFloor)) {
        throw SingularMatrixError(fmt::format("{}: smallest eigenvalue {} is not above {}", what, lo, kEigenFloor));
    }
    return es;
}

}  // namespace

InverseRoots inv_and_inv_sqrt(const SymMatrix& V) {
    const auto es = checked_eigen(V, "inv_and_inv_sqrt");
    const Mat& Q = es.eigenvectors();
    const Vec& lambda = es.eigenvalues();
    const Mat inv = Q * lambda.cwiseInverse().asDiagonal() * Q.transpose();
    const Mat inv_sqrt = Q * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * Q.transpose();
    return {SymMatrix(inv), SymMatrix(inv_sqrt), lambda.array().log().sum()};
}

double log_det(const SymMatrix& V) {
    const auto es = checked_eigen(V, "log_det");
    return es.eigenvalues().array().log().sum();
}

double mahalanobis(const Vec& a, const SymMatrix& V_inv) {
    const double q = V_inv.quadratic_form(a);
    if (q < -1e-12) {
        throw std::domain_error(fmt::format("mahalanobis: quadratic form {} is negative", q));
    }
    return q > 0.0 ? std::sqrt(q) : 0.0;
}

}  // namespace colts
