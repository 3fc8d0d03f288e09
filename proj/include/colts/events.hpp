#pragma once

#include "colts/estimator.hpp"
#include "colts/instance.hpp"
#include "colts/noise.hpp"

#include <optional>

namespace colts {

inline constexpr double kEventTol = 1e-10;

struct EventFlags {
    bool consistent = false;
    bool local_optimism = false;
    bool global_optimism = false;
    bool unsaturated = false;
    bool perturbed_feasible = false;

    /// local => global and (local and consistent) => unsaturated.
    bool containments_hold() const {
        return (!local_optimism || global_optimism) && (!(local_optimism && consistent) || unsaturated);
    }
};

/// a_star stays feasible for the perturbed constraints and its perturbed value
/// is at least the true optimum.
bool detect_local(const PerturbedParams& pp, const InstanceSolution& sol, const SlbInstance& inst);

/// The perturbed LP is feasible with value >= value_star - tol.
bool detect_global(const PerturbedParams& pp, const Polytope& domain, const Vec& alpha, double value_star,
                   double tol);

/// gap <= width + 1e-10.
bool detect_unsaturated(double gap, double width);

/// Evaluates every flag for one draw. Solves the perturbed LP once and uses
/// its optimizer both for global optimism and for unsaturation.
EventFlags instrument_round(const PerturbedParams& pp, const SlbInstance& inst, const InstanceSolution& sol,
                            const SufficientStats& stats, const Estimates& est, double B_t);

}  // namespace colts
