#include "colts/noise.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

namespace colts {

PerturbationLaw PerturbationLaw::theory(Eigen::Index d, Eigen::Index m, NoiseDesign design) {
    return {design, BaseMeasure::Sphere, std::sqrt(3.0 * static_cast<double>(d)), d, m};
}

PerturbationLaw PerturbationLaw::practical(Eigen::Index d, Eigen::Index m, NoiseDesign design) {
    return {design, BaseMeasure::Sphere, 0.5, d, m};
}

Vec sample_base(const PerturbationLaw& law, Rng& rng) {
    std::normal_distribution<double> normal;
    Vec z(law.d);
    if (law.base == BaseMeasure::Gaussian) {
        for (Eigen::Index i = 0; i < law.d; ++i) z[i] = normal(rng);
        return z;
    }
    double nrm = 0.0;
    do {
        for (Eigen::Index i = 0; i < law.d; ++i) z[i] = normal(rng);
        nrm = z.norm();
    } while (nrm == 0.0);
    return (law.gamma / nrm) * z;
}

Noise sample_noise(const PerturbationLaw& law, Rng& rng) {
    Noise out;
    out.eta = sample_base(law, rng);
    out.H.resize(law.m, law.d);
    if (law.design == NoiseDesign::Coupled) {
        out.H.rowwise() = -out.eta.transpose();
    } else {
        for (Eigen::Index i = 0; i < law.m; ++i) out.H.row(i) = sample_base(law, rng).transpose();
    }
    return out;
}

double concentration_B(const PerturbationLaw& law, double xi) {
    if (!(xi > 0.0 && xi <= 1.0)) {
        throw std::invalid_argument(fmt::format("concentration_B: xi = {} not in (0, 1]", xi));
    }
    if (law.base == BaseMeasure::Sphere) return law.gamma;
    // Chi-square tail; a decoupled draw has m + 1 independent rows to union over.
    const double rows = law.design == NoiseDesign::Coupled ? 1.0 : static_cast<double>(law.m + 1);
    return std::sqrt(static_cast<double>(law.d)) + std::sqrt(2.0 * std::log(rows / xi));
}

PerturbedParams perturb(const Estimates& est, const SufficientStats& stats, const Vec& eta, const Mat& H) {
    const Eigen::Index d = stats.d();
    if (eta.size() != d || H.cols() != d || H.rows() != est.phi_hat.rows() || est.theta_hat.size() != d) {
        throw DimensionError("perturb: dimension mismatch");
    }
    const Mat& W = stats.V_inv_sqrt().matrix();
    return {est.theta_hat + est.omega * (W * eta), est.phi_hat + est.omega * (H * W)};
}

}  // namespace colts
