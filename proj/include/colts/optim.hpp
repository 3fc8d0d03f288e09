#pragma once

#include "colts/linalg.hpp"
#include "colts/polytope.hpp"

#include <stdexcept>

namespace colts {

/// Thrown when an LP over a supposedly compact domain turns out unbounded, or
/// when the pivot cap is hit.
class SolverError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A caller broke a documented precondition (e.g. infeasible anchor in the
/// scaling search).
class PreconditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

enum class LpStatus { Optimal, Infeasible };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Vec x;
    double value = 0.0;

    bool optimal() const { return status == LpStatus::Optimal; }
};

/// max c^T a over dom ∩ {extra_lhs a <= extra_rhs}.
///
/// Dense two-phase tableau simplex with Bland's rule, so the returned vertex is
/// a deterministic function of the inputs. `tol` is the phase-1 threshold: a
/// program whose constraints cannot be met to within `tol` is Infeasible.
/// Throws SolverError on unboundedness (the domain must be compact).
LpResult solve_lp(const Vec& c, const Polytope& dom, const Mat& extra_lhs, const Vec& extra_rhs,
                  double tol = 1e-9);

/// LP tolerance used at round t: min(1e-6, 1/t).
double round_tolerance(long t);

/// Pessimistic constraint value g(a) = max_i (phi_hat a - alpha)^i + omega ||a||_{V^{-1}}.
double pessimistic_violation(const Mat& phi_hat, const Vec& alpha, double omega, const SymMatrix& V_inv,
                             const Vec& a);

/// Largest rho in [0, 1] such that (1 - rho) a_safe + rho b passes the pessimistic
/// constraint. g is convex in rho, so the feasible set is an interval [0, rho*];
/// rho* is located by bisection to width `tol` and the feasible end is returned.
/// Throws PreconditionError if g(0) > tol.
double max_scaling_rho(const Mat& phi_hat, const Vec& alpha, double omega, const SymMatrix& V_inv,
                       const Vec& a_safe, const Vec& b, double tol);

struct SocResult {
    LpResult lp;
    int cut_rounds = 0;
    /// Cut cap reached; the iterate was pulled back toward the anchor.
    bool degraded = false;
};

inline constexpr int kSocCutCap = 200;

/// max c^T a over dom subject to phi_hat^i a + omega ||V^{-1/2} a|| <= alpha^i for all i.
///
/// Outer approximation: each round solves the LP relaxation and, for every row
/// violated by more than `tol` at the iterate x, adds the supporting cut
/// phi_hat^i a + omega u^T V^{-1/2} a <= alpha^i with u = V^{-1/2} x / ||V^{-1/2} x||.
/// After `cut_cap` rounds, or if the relaxation stalls in the simplex, the last
/// iterate is scaled toward `anchor`, which must satisfy the cone constraints,
/// until feasible.
SocResult solve_soc(const Vec& c, const Polytope& dom, const Mat& phi_hat, const Vec& alpha, double omega,
                    const SymMatrix& V_inv_sqrt, double tol, const Vec& anchor, int cut_cap = kSocCutCap);

}  // namespace colts
