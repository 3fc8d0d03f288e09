#pragma once

#include "colts/instance.hpp"
#include "colts/linalg.hpp"

namespace colts {

/// Online ridge regression (regularizer I) for theta_star and the rows of
/// phi_star. Caches V^{-1} and V^{-1/2} are refreshed on every update.
class SufficientStats {
public:
    SufficientStats(Eigen::Index d, Eigen::Index m);

    Eigen::Index d() const { return xr_.size(); }
    Eigen::Index m() const { return XS_.cols(); }
    /// Number of updates so far; the next round is t() + 1.
    long t() const { return t_; }

    const SymMatrix& V() const { return V_; }
    const SymMatrix& V_inv() const { return roots_.inv; }
    const SymMatrix& V_inv_sqrt() const { return roots_.inv_sqrt; }
    const Vec& xr() const { return xr_; }
    const Mat& XS() const { return XS_; }
    double log_det_V() const { return roots_.log_det; }

    /// V += a a^T, xr += a R, XS += a S^T, t += 1.
    void update(const Vec& a, double R, const Vec& S);

private:
    SymMatrix V_;
    InverseRoots roots_;
    Vec xr_;
    Mat XS_;
    long t_ = 0;
};

struct Estimates {
    Vec theta_hat;
    Mat phi_hat;  // m x d
    double omega = 1.0;
};

/// omega_t(delta) = 1 + sqrt(0.5 log((m+1)/delta) + 0.25 log det V).
double confidence_radius(const SufficientStats& stats, Eigen::Index m, double delta);

/// Ridge estimates and confidence radius from the current statistics.
Estimates estimate(const SufficientStats& stats, double delta);

/// M_t(a) = B_t * omega * ||a||_{V^{-1}}.
double width(const SufficientStats& stats, double B_t, double omega, const Vec& a);

/// delta_t = delta / (t (t + 1)), t >= 1.
double delta_t(double delta, long t);

/// B_t = 1 + max(1, B(delta_t)) given the already-evaluated B(delta_t).
inline double inflate_concentration(double B_at_delta_t) { return 1.0 + std::max(1.0, B_at_delta_t); }

/// Con_t: ||theta_hat - theta_star||_V <= omega and every row of phi_hat within
/// omega of phi_star in V-norm. Needs the ground truth.
bool consistency_holds(const Estimates& est, const SufficientStats& stats, const SlbInstance& truth);

}  // namespace colts
