#pragma once

#include "colts/estimator.hpp"
#include "colts/noise.hpp"
#include "colts/optim.hpp"
#include "colts/polytope.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace colts {

/// sqrt(4 t log(max(1, log t) / delta)): anytime envelope for a 1-subGaussian walk.
double lil_bound(double t, double delta);

/// Anytime estimate of the safety margin of a_safe from repeated plays of it.
///
/// Keeps Av_t = sum_s (alpha - S_s) / t and the bands Av_t +- LIL(t, delta/m)/t;
/// stops the first time every lower band is at least half its upper band and
/// reports Gamma0 = min_i of the lower bands.
class Gamma0Estimator {
public:
    Gamma0Estimator(Eigen::Index m, double delta);

    /// Feeds one observation of S at a_safe. Throws std::logic_error once done.
    void step(const Vec& S, const Vec& alpha);

    bool done() const { return gamma0_.has_value(); }
    double gamma0() const;
    long pulls() const { return t_; }
    const Vec& average() const { return avg_; }

private:
    Vec sum_;
    Vec avg_;
    long t_ = 0;
    double delta_;
    std::optional<double> gamma0_;
};

enum class AlgorithmKind { SColts, RColts, EColts, SafeLts };

std::string_view algorithm_name(AlgorithmKind kind);
AlgorithmKind parse_algorithm(std::string_view name);

/// How S-COLTS obtains Gamma0.
enum class Gamma0Mode {
    /// Estimate unless the gate is vacuous (a_safe = 0 gives M_t(a_safe) = 0).
    Auto,
    Estimate,
    Known,
};

struct AgentConfig {
    AlgorithmKind kind = AlgorithmKind::SColts;
    PerturbationLaw law;
    double delta = 0.1;
    /// R-COLTS: I_t = 1 + ceil(r log(t(t+1)/delta)) unless samples_fixed > 0.
    int resampling_order = 0;
    int samples_fixed = 0;
    Gamma0Mode gamma0_mode = Gamma0Mode::Auto;
    double gamma0_known = 0.0;
    /// E-COLTS exploration actions; empty means derive from the domain.
    std::vector<Vec> spanner;
    /// Bisection width for the S-COLTS scaling search.
    double rho_tol = 1e-9;
};

/// Round-robin exploration set for built-in domain shapes: the scaled
/// coordinate vertices of [0, u] boxes, two orthogonal corners of a symmetric
/// square, the scaled coordinate vectors of any other box containing the
/// origin. Throws std::invalid_argument for other domains.
std::vector<Vec> default_spanner(const Polytope& domain);

struct AgentState {
    AlgorithmKind kind;
    SufficientStats stats;
    std::optional<Gamma0Estimator> gamma0;
    long u_explore = 0;
    Vec last_action;
    size_t spanner_index = 0;
};

struct StepOutcome {
    Vec action;
    bool explored = false;   // E-COLTS E-step
    bool fallback = false;   // a_safe / previous action played instead of a perturbed optimizer
    bool warmup = false;     // S-COLTS Gamma0 phase
    bool degraded = false;   // SOC cut cap hit
    double rho = 1.0;
    int samples = 0;
    /// The perturbed parameters behind the decision (the winning draw for R-COLTS).
    std::optional<PerturbedParams> draw;
    /// The perturbed LP optimizer for `draw`, when it was solved and exists.
    std::optional<Vec> b;
};

/// Everything a step needs about the current round.
struct RoundContext {
    long t;           // 1-based round index
    Estimates est;    // theta_hat, phi_hat, omega_t(delta)
    double B_t;       // 1 + max(1, B(delta_t))
    double lp_tol;    // min(1e-6, 1/t)
};

RoundContext make_round_context(const SufficientStats& stats, const PerturbationLaw& law, double delta);

StepOutcome scolts_step(AgentState& state, const RoundContext& ctx, const PerturbationLaw& law, Rng& rng,
                        const Polytope& domain, const Vec& alpha, const Vec& a_safe, double gamma0, double rho_tol);

/// Number of perturbations drawn at round t.
int resample_count(int r, long t, double delta);

/// Index of the highest-value feasible program (lowest index on ties) and its
/// solution, or nullopt when all are infeasible.
struct ResampleWinner {
    size_t index;
    LpResult lp;
};
std::optional<ResampleWinner> select_best_program(const std::vector<PerturbedParams>& draws, const Polytope& domain,
                                                  const Vec& alpha, double tol);

StepOutcome rcolts_step(AgentState& state, const RoundContext& ctx, const PerturbationLaw& law, Rng& rng,
                        const Polytope& domain, const Vec& alpha, int samples);

StepOutcome ecolts_step(AgentState& state, const RoundContext& ctx, const PerturbationLaw& law, Rng& rng,
                        const Polytope& domain, const Vec& alpha, const std::vector<Vec>& spanner);

/// Next spanner element, round-robin.
Vec exploration_policy(AgentState& state, const std::vector<Vec>& spanner);

/// E-COLTS forced-exploration threshold B_t omega_t sqrt(d t).
double exploration_threshold(const RoundContext& ctx, Eigen::Index d);

StepOutcome safelts_step(AgentState& state, const RoundContext& ctx, const PerturbationLaw& law, Rng& rng,
                         const Polytope& domain, const Vec& alpha, const Vec& a_safe);

/// One learner: owns its statistics and per-algorithm state.
class Agent {
public:
    /// a_safe is required for S-COLTS and SAFE-LTS.
    Agent(AgentConfig config, Polytope domain, Vec alpha, std::optional<Vec> a_safe);

    StepOutcome select(Rng& rng);
    void observe(const Vec& a, double R, const Vec& S);

    const AgentConfig& config() const { return config_; }
    const AgentState& state() const { return state_; }
    /// Context of the most recent select().
    const RoundContext& context() const { return ctx_; }
    std::optional<double> gamma0() const;

private:
    AgentConfig config_;
    Polytope domain_;
    Vec alpha_;
    std::optional<Vec> a_safe_;
    std::vector<Vec> spanner_;
    AgentState state_;
    RoundContext ctx_;
};

}  // namespace colts
