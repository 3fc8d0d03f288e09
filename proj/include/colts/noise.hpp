#pragma once

#include "colts/estimator.hpp"
#include "colts/linalg.hpp"

#include <random>

namespace colts {

using Rng = std::mt19937_64;

enum class NoiseDesign { Coupled, Decoupled };
enum class BaseMeasure { Sphere, Gaussian };

/// Law of the perturbation (eta, H).
///
/// Coupled: one base draw zeta gives eta = zeta^T and H = -1_m zeta^T, so the
/// objective moves up exactly as every constraint row moves down.
/// Decoupled: eta and each row of H are independent base draws.
struct PerturbationLaw {
    NoiseDesign design = NoiseDesign::Coupled;
    BaseMeasure base = BaseMeasure::Sphere;
    double gamma = 0.5;  // sphere radius
    Eigen::Index d = 1;
    Eigen::Index m = 1;

    /// Sphere of radius sqrt(3d): the law the regret guarantees are stated for.
    static PerturbationLaw theory(Eigen::Index d, Eigen::Index m, NoiseDesign design = NoiseDesign::Coupled);
    /// Sphere of radius 0.5, the setting used in all the simulations.
    static PerturbationLaw practical(Eigen::Index d, Eigen::Index m, NoiseDesign design = NoiseDesign::Coupled);
};

struct Noise {
    Vec eta;  // the row vector eta, stored as a column
    Mat H;    // m x d
};

struct PerturbedParams {
    Vec theta_tilde;
    Mat phi_tilde;
};

Vec sample_base(const PerturbationLaw& law, Rng& rng);

Noise sample_noise(const PerturbationLaw& law, Rng& rng);

/// B(xi) with law(max(||eta||, max_i ||H^i||) >= B(xi)) <= xi.
double concentration_B(const PerturbationLaw& law, double xi);

/// theta_tilde^T = theta_hat^T + omega eta V^{-1/2};
/// phi_tilde = phi_hat + omega H V^{-1/2}.
PerturbedParams perturb(const Estimates& est, const SufficientStats& stats, const Vec& eta, const Mat& H);

}  // namespace colts
