#include "colts/events.hpp"

#include "colts/optim.hpp"

namespace colts {

namespace {

// Phase-1 slack for the perturbed LP; a_star is feasible to within kEventTol
// whenever local optimism holds, so this keeps local => global exact.
constexpr double kLpTol = 1e-9;

}  // namespace

bool detect_local(const PerturbedParams& pp, const InstanceSolution& sol, const SlbInstance& inst) {
    const double value = pp.theta_tilde.dot(sol.a_star);
    if (value < inst.theta_star().dot(sol.a_star) - kEventTol) return false;
    return ((pp.phi_tilde * sol.a_star - inst.alpha()).array() <= kEventTol).all();
}

bool detect_global(const PerturbedParams& pp, const Polytope& domain, const Vec& alpha, double value_star,
                   double tol) {
    const LpResult lp = solve_lp(pp.theta_tilde, domain, pp.phi_tilde, alpha, kLpTol);
    return lp.optimal() && lp.value >= value_star - tol;
}

bool detect_unsaturated(double gap, double width) { return gap <= width + kEventTol; }

EventFlags instrument_round(const PerturbedParams& pp, const SlbInstance& inst, const InstanceSolution& sol,
                            const SufficientStats& stats, const Estimates& est, double B_t) {
    EventFlags f;
    f.consistent = consistency_holds(est, stats, inst);
    f.local_optimism = detect_local(pp, sol, inst);
    const LpResult lp = solve_lp(pp.theta_tilde, inst.domain(), pp.phi_tilde, inst.alpha(), kLpTol);
    f.perturbed_feasible = lp.optimal();
    if (lp.optimal()) {
        f.global_optimism = lp.value >= sol.value_star - kEventTol;
        f.unsaturated = detect_unsaturated(reward_gap(inst, sol, lp.x), width(stats, B_t, est.omega, lp.x));
    }
    return f;
}

}  // namespace colts
