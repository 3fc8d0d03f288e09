#include "colts/algorithms.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/core.h>

namespace colts {

double lil_bound(double t, double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) {
        throw std::invalid_argument(fmt::format("lil_bound: delta = {} not in (0, 1]", delta));
    }
    if (!(t >= 1.0)) throw std::invalid_argument(fmt::format("lil_bound: t = {} < 1", t));
    return std::sqrt(4.0 * t * std::log(std::max(1.0, std::log(t)) / delta));
}

Gamma0Estimator::Gamma0Estimator(Eigen::Index m, double delta)
    : sum_(Vec::Zero(m)), avg_(Vec::Zero(m)), delta_(delta) {
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument(fmt::format("Gamma0Estimator: delta = {} not in (0, 1)", delta));
    }
}

void Gamma0Estimator::step(const Vec& S, const Vec& alpha) {
    if (done()) throw std::logic_error("Gamma0Estimator::step: already stopped");
    if (S.size() != sum_.size() || alpha.size() != sum_.size()) {
        throw DimensionError("Gamma0Estimator::step: dimension mismatch");
    }
    sum_ += alpha - S;
    ++t_;
    const double t = static_cast<double>(t_);
    avg_ = sum_ / t;
    const double half = lil_bound(t, delta_ / static_cast<double>(sum_.size())) / t;
    const Vec upper = avg_.array() + half;
    const Vec lower = avg_.array() - half;
    if ((lower.array() >= 0.5 * upper.array()).all()) gamma0_ = lower.minCoeff();
}

double Gamma0Estimator::gamma0() const {
    if (!gamma0_) throw std::logic_error("Gamma0Estimator::gamma0: still running");
    return *gamma0_;
}

std::string_view algorithm_name(AlgorithmKind kind) {
    switch (kind) {
        case AlgorithmKind::SColts: return "s-colts";
        case AlgorithmKind::RColts: return "r-colts";
        case AlgorithmKind::EColts: return "e-colts";
        case AlgorithmKind::SafeLts: return "safe-lts";
    }
    return "?";
}

AlgorithmKind parse_algorithm(std::string_view name) {
    for (auto k : {AlgorithmKind::SColts, AlgorithmKind::RColts, AlgorithmKind::EColts, AlgorithmKind::SafeLts}) {
        if (algorithm_name(k) == name) return k;
    }
    throw std::invalid_argument(fmt::format("unknown algorithm '{}'", name));
}

std::vector<Vec> default_spanner(const Polytope& domain) {
    const Eigen::Index d = domain.dim();
    if (domain.num_rows() != 0 || !domain.lower.allFinite() || !domain.upper.allFinite()) {
        throw std::invalid_argument("default_spanner: only finite boxes are supported; supply a spanner");
    }
    std::vector<Vec> out;
    const bool symmetric = (domain.lower + domain.upper).cwiseAbs().maxCoeff() <= 1e-12;
    if (d == 2 && symmetric) {
        const double u0 = domain.upper[0], u1 = domain.upper[1];
        out.push_back(Vec{{u0, u1}});
        out.push_back(Vec{{u0, -u1}});
        return out;
    }
    if ((domain.lower.array() > 0.0).any() || (domain.upper.array() <= 0.0).any()) {
        throw std::invalid_argument("default_spanner: box does not contain the origin; supply a spanner");
    }
    for (Eigen::Index j = 0; j < d; ++j) out.push_back(domain.upper[j] * Vec::Unit(d, j));
    return out;
}

RoundContext make_round_context(const SufficientStats& stats, const PerturbationLaw& law, double delta) {
    const long t = stats.t() + 1;
    RoundContext ctx{t, estimate(stats, delta), 0.0, round_tolerance(t)};
    ctx.B_t = inflate_concentration(concentration_B(law, delta_t(delta, t)));
    return ctx;
}

StepOutcome scolts_step(AgentState& state, const RoundContext& ctx, const PerturbationLaw& law, Rng& rng,
                        const Polytope& domain, const Vec& alpha, const Vec& a_safe, double gamma0, double rho_tol) {
    StepOutcome out;
    const Noise noise = sample_noise(law, rng);
    out.draw = perturb(ctx.est, state.stats, noise.eta, noise.H);
    out.samples = 1;

    const auto play_safe = [&] {
        out.action = a_safe;
        out.fallback = true;
        out.rho = 0.0;
        return out;
    };

    if (width(state.stats, ctx.B_t, ctx.est.omega, a_safe) > gamma0 / 3.0) return play_safe();
    const LpResult lp = solve_lp(out.draw->theta_tilde, domain, out.draw->phi_tilde, alpha, ctx.lp_tol);
    if (!lp.optimal()) return play_safe();
    out.b = lp.x;

    const SymMatrix& Vinv = state.stats.V_inv();
    if (pessimistic_violation(ctx.est.phi_hat, alpha, ctx.est.omega, Vinv, a_safe) > rho_tol) return play_safe();
    out.rho = max_scaling_rho(ctx.est.phi_hat, alpha, ctx.est.omega, Vinv, a_safe, lp.x, rho_tol);
    out.action = (1.0 - out.rho) * a_safe + out.rho * lp.x;
    return out;
}

int resample_count(int r, long t, double delta) {
    if (r < 0) throw std::invalid_argument("resample_count: r < 0");
    const double td = static_cast<double>(t);
    return 1 + static_cast<int>(std::ceil(r * std::log(td * (td + 1.0) / delta)));
}

std::optional<ResampleWinner> select_best_program(const std::vector<PerturbedParams>& draws, const Polytope& domain,
                                                  const Vec& alpha, double tol) {
    std::optional<ResampleWinner> best;
    for (size_t i = 0; i < draws.size(); ++i) {
        LpResult lp = solve_lp(draws[i].theta_tilde, domain, draws[i].phi_tilde, alpha, tol);
        if (!lp.optimal()) continue;
        if (!best || lp.value > best->lp.value) best = ResampleWinner{i, std::move(lp)};
    }
    return best;
}

StepOutcome rcolts_step(AgentState& state, const RoundContext& ctx, const PerturbationLaw& law, Rng& rng,
                        const Polytope& domain, const Vec& alpha, int samples) {
    if (samples < 1) throw std::invalid_argument("rcolts_step: need at least one sample");
    std::vector<PerturbedParams> draws;
    draws.reserve(static_cast<size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        const Noise noise = sample_noise(law, rng);
        draws.push_back(perturb(ctx.est, state.stats, noise.eta, noise.H));
    }
    StepOutcome out;
    out.samples = samples;
    const auto best = select_best_program(draws, domain, alpha, ctx.lp_tol);
    if (!best) {
        out.draw = std::move(draws.front());
        out.action = state.last_action;
        out.fallback = true;
        return out;
    }
    out.draw = std::move(draws[best->index]);
    out.b = best->lp.x;
    out.action = best->lp.x;
    state.last_action = out.action;
    return out;
}

Vec exploration_policy(AgentState& state, const std::vector<Vec>& spanner) {
    if (spanner.empty()) throw std::invalid_argument("exploration_policy: empty spanner");
    const Vec a = spanner[state.spanner_index % spanner.size()];
    state.spanner_index = (state.spanner_index + 1) % spanner.size();
    return a;
}

double exploration_threshold(const RoundContext& ctx, Eigen::Index d) {
    return ctx.B_t * ctx.est.omega * std::sqrt(static_cast<double>(d) * static_cast<double>(ctx.t));
}

StepOutcome ecolts_step(AgentState& state, const RoundContext& ctx, const PerturbationLaw& law, Rng& rng,
                        const Polytope& domain, const Vec& alpha, const std::vector<Vec>& spanner) {
    StepOutcome out;
    const Noise noise = sample_noise(law, rng);
    out.draw = perturb(ctx.est, state.stats, noise.eta, noise.H);
    out.samples = 1;

    bool explore = static_cast<double>(state.u_explore) <= exploration_threshold(ctx, state.stats.d());
    if (!explore) {
        const LpResult lp = solve_lp(out.draw->theta_tilde, domain, out.draw->phi_tilde, alpha, ctx.lp_tol);
        if (lp.optimal()) {
            out.b = lp.x;
            out.action = lp.x;
        } else {
            explore = true;
        }
    }
    if (explore) {
        out.action = exploration_policy(state, spanner);
        out.explored = true;
        ++state.u_explore;
    }
    return out;
}

StepOutcome safelts_step(AgentState& state, const RoundContext& ctx, const PerturbationLaw& law, Rng& rng,
                         const Polytope& domain, const Vec& alpha, const Vec& a_safe) {
    StepOutcome out;
    // Same base draw as the coupled COLTS noise; only the objective moves.
    const Vec eta = sample_base(law, rng);
    const SymMatrix& W = state.stats.V_inv_sqrt();
    out.draw = PerturbedParams{ctx.est.theta_hat + ctx.est.omega * (W.matrix() * eta), ctx.est.phi_hat};
    out.samples = 1;
    const SocResult soc =
        solve_soc(out.draw->theta_tilde, domain, ctx.est.phi_hat, alpha, ctx.est.omega, W, ctx.lp_tol, a_safe);
    out.degraded = soc.degraded;
    if (!soc.lp.optimal()) {
        out.action = a_safe;
        out.fallback = true;
        return out;
    }
    out.action = soc.lp.x;
    return out;
}

namespace {

Vec phase_one_point(const Polytope& domain) {
    const LpResult lp = solve_lp(Vec::Zero(domain.dim()), domain, Mat(0, domain.dim()), Vec(0));
    if (!lp.optimal()) throw std::invalid_argument("Agent: empty domain");
    return lp.x;
}

}  // namespace

Agent::Agent(AgentConfig config, Polytope domain, Vec alpha, std::optional<Vec> a_safe)
    : config_(std::move(config)),
      domain_(std::move(domain)),
      alpha_(std::move(alpha)),
      a_safe_(std::move(a_safe)),
      state_{config_.kind, SufficientStats(domain_.dim(), alpha_.size()), std::nullopt, 0, Vec(), 0},
      ctx_{0, Estimates{}, 0.0, 0.0} {
    if (config_.law.d != domain_.dim() || config_.law.m != alpha_.size()) {
        throw DimensionError("Agent: perturbation law dimensions do not match the instance");
    }
    const bool needs_safe = config_.kind == AlgorithmKind::SColts || config_.kind == AlgorithmKind::SafeLts;
    if (needs_safe && !a_safe_) {
        throw std::invalid_argument(fmt::format("{} needs a safe action", algorithm_name(config_.kind)));
    }
    if (config_.kind == AlgorithmKind::SColts) {
        const bool vacuous = a_safe_->isZero(0.0);
        switch (config_.gamma0_mode) {
            case Gamma0Mode::Auto:
                if (!vacuous) state_.gamma0.emplace(alpha_.size(), config_.delta);
                break;
            case Gamma0Mode::Estimate: state_.gamma0.emplace(alpha_.size(), config_.delta); break;
            case Gamma0Mode::Known:
                if (!(config_.gamma0_known > 0.0)) throw std::invalid_argument("Agent: known Gamma0 must be > 0");
                break;
        }
    }
    if (config_.kind == AlgorithmKind::RColts) {
        if (config_.resampling_order < 0 || config_.samples_fixed < 0) {
            throw std::invalid_argument("Agent: resampling parameters must be nonnegative");
        }
        state_.last_action = phase_one_point(domain_);
    }
    if (config_.kind == AlgorithmKind::EColts) {
        spanner_ = config_.spanner.empty() ? default_spanner(domain_) : config_.spanner;
        for (const Vec& e : spanner_) {
            if (e.size() != domain_.dim() || !domain_.contains(e, 1e-9)) {
                throw std::invalid_argument("Agent: spanner element outside the domain");
            }
        }
    }
}

std::optional<double> Agent::gamma0() const {
    if (config_.kind != AlgorithmKind::SColts) return std::nullopt;
    if (config_.gamma0_mode == Gamma0Mode::Known) return config_.gamma0_known;
    if (!state_.gamma0) return std::numeric_limits<double>::infinity();
    if (!state_.gamma0->done()) return std::nullopt;
    return state_.gamma0->gamma0();
}

StepOutcome Agent::select(Rng& rng) {
    ctx_ = make_round_context(state_.stats, config_.law, config_.delta);
    switch (config_.kind) {
        case AlgorithmKind::SColts: {
            if (state_.gamma0 && !state_.gamma0->done()) {
                StepOutcome out;
                out.action = *a_safe_;
                out.warmup = true;
                out.rho = 0.0;
                return out;
            }
            return scolts_step(state_, ctx_, config_.law, rng, domain_, alpha_, *a_safe_, *gamma0(),
                               config_.rho_tol);
        }
        case AlgorithmKind::RColts: {
            const int samples = config_.samples_fixed > 0
                                    ? config_.samples_fixed
                                    : resample_count(config_.resampling_order, ctx_.t, config_.delta);
            return rcolts_step(state_, ctx_, config_.law, rng, domain_, alpha_, samples);
        }
        case AlgorithmKind::EColts: return ecolts_step(state_, ctx_, config_.law, rng, domain_, alpha_, spanner_);
        case AlgorithmKind::SafeLts: return safelts_step(state_, ctx_, config_.law, rng, domain_, alpha_, *a_safe_);
    }
    throw std::logic_error("Agent::select: unknown algorithm");
}

void Agent::observe(const Vec& a, double R, const Vec& S) {
    if (state_.gamma0 && !state_.gamma0->done()) state_.gamma0->step(S, alpha_);
    state_.stats.update(a, R, S);
}

}  // namespace colts
