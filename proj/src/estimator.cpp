#include "colts/estimator.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

namespace colts {

SufficientStats::SufficientStats(Eigen::Index d, Eigen::Index m)
    : V_(SymMatrix::identity(d)), roots_{SymMatrix::identity(d), SymMatrix::identity(d), 0.0}, xr_(Vec::Zero(d)),
      XS_(Mat::Zero(d, m)) {}

void SufficientStats::update(const Vec& a, double R, const Vec& S) {
    if (a.size() != d() || S.size() != m()) {
        throw DimensionError(fmt::format("SufficientStats::update: got a[{}], S[{}] for d = {}, m = {}", a.size(),
                                         S.size(), d(), m()));
    }
    V_ = rank1_update(V_, a);
    xr_ += a * R;
    XS_.noalias() += a * S.transpose();
    roots_ = inv_and_inv_sqrt(V_);
    ++t_;
}

double confidence_radius(const SufficientStats& stats, Eigen::Index m, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument(fmt::format("confidence_radius: delta = {} not in (0, 1)", delta));
    }
    const double inner = 0.5 * std::log(static_cast<double>(m + 1) / delta) + 0.25 * stats.log_det_V();
    return 1.0 + std::sqrt(inner);
}

Estimates estimate(const SufficientStats& stats, double delta) {
    const Mat& Vinv = stats.V_inv().matrix();
    return Estimates{Vinv * stats.xr(), (Vinv * stats.XS()).transpose(), confidence_radius(stats, stats.m(), delta)};
}

double width(const SufficientStats& stats, double B_t, double omega, const Vec& a) {
    return B_t * omega * mahalanobis(a, stats.V_inv());
}

double delta_t(double delta, long t) {
    if (t < 1) throw std::invalid_argument("delta_t: t must be >= 1");
    const double tt = static_cast<double>(t);
    return delta / (tt * (tt + 1.0));
}

bool consistency_holds(const Estimates& est, const SufficientStats& stats, const SlbInstance& truth) {
    const SymMatrix& V = stats.V();
    auto vnorm = [&](const Vec& v) { return std::sqrt(std::max(0.0, V.quadratic_form(v))); };
    if (vnorm(est.theta_hat - truth.theta_star()) > est.omega) return false;
    for (Eigen::Index i = 0; i < truth.m(); ++i) {
        if (vnorm((est.phi_hat.row(i) - truth.phi_star().row(i)).transpose()) > est.omega) return false;
    }
    return true;
}

}  // namespace colts
