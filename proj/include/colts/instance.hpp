#pragma once

#include "colts/linalg.hpp"
#include "colts/polytope.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace colts {

class InstanceError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Ground truth of a safe linear bandit: maximize theta_star^T a subject to
/// phi_star a <= alpha over the known domain. Immutable after construction.
class SlbInstance {
public:
    /// Validates norms, dimensions, feasibility (phase-1 LP) and, if given, that
    /// a_safe has a positive safety margin. Throws InstanceError.
    SlbInstance(std::string id, Vec theta_star, Mat phi_star, Vec alpha, Polytope domain,
                std::optional<Vec> a_safe, double obs_sigma);

    const std::string& id() const { return id_; }
    Eigen::Index d() const { return theta_star_.size(); }
    Eigen::Index m() const { return phi_star_.rows(); }
    const Vec& theta_star() const { return theta_star_; }
    const Mat& phi_star() const { return phi_star_; }
    const Vec& alpha() const { return alpha_; }
    const Polytope& domain() const { return domain_; }
    const std::optional<Vec>& a_safe() const { return a_safe_; }
    double obs_sigma() const { return obs_sigma_; }

    /// Copy with a different observation-noise scale.
    SlbInstance with_sigma(double sigma) const;

private:
    std::string id_;
    Vec theta_star_;
    Mat phi_star_;
    Vec alpha_;
    Polytope domain_;
    std::optional<Vec> a_safe_;
    double obs_sigma_;
};

struct InstanceSolution {
    Vec a_star;
    double value_star = 0.0;
    /// Gamma(a_safe) when the instance has a safe action.
    std::optional<double> gamma_safe;
};

InstanceSolution optimal_action(const SlbInstance& inst);

/// Delta(a) = theta_star^T (a_star - a); negative for superoptimal infeasible a.
double reward_gap(const SlbInstance& inst, const InstanceSolution& sol, const Vec& a);

/// Gamma(a) = (min_i (alpha - phi_star a)^i)_+.
double safety_margin(const SlbInstance& inst, const Vec& a);

/// (max_i (phi_star a - alpha)^i)_+.
double constraint_violation(const SlbInstance& inst, const Vec& a);

inline constexpr std::uint64_t kDefaultBoxSeed = 4;

/// d = m = 9: theta_star = 1/sqrt(d), domain [0, 1/sqrt(d)]^d, phi_star a seeded
/// Bernoulli(0.6) 0/1 matrix with unit-norm rows, alpha = 0.8/sqrt(d), a_safe = 0.
SlbInstance builtin_box_instance(std::uint64_t seed = kDefaultBoxSeed, double sigma = 1.0);

/// d = 2: theta_star = (1, 0), domain [-1/sqrt2, 1/sqrt2]^2, unknown constraints
/// the edges of the regular m-gon centred at the origin with a vertex at
/// (0.2/sqrt2, 0); m = 1 is the single half-plane a_1 <= 0.2/sqrt2. a_safe = 0.
SlbInstance builtin_polygon_instance(int m, double sigma = 1.0);

/// Key-value text serialization ([instance] and [domain] sections).
void save_instance(const SlbInstance& inst, const std::filesystem::path& path);
SlbInstance load_instance(const std::filesystem::path& path);

}  // namespace colts
