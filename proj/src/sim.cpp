#include "colts/sim.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <utility>
#include <mutex>
#include <thread>

#include <fmt/core.h>
#include <fmt/format.h>

namespace colts {

EpisodeError::EpisodeError(std::uint64_t seed, const std::string& what)
    : std::runtime_error(fmt::format("seed {}: {}", seed, what)), seed_(seed) {}

Rng environment_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 1u};
    return Rng(seq);
}

Rng agent_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 2u};
    return Rng(seq);
}

namespace {

constexpr double kDomainTol = 1e-6;
constexpr double kPessimismTol = 1e-8;
constexpr double kTrueSafetyTol = 1e-6;

void check_in_domain(const SlbInstance& inst, const Vec& a, long t) {
    if (a.size() != inst.d() || !(inst.domain().max_violation(a) <= kDomainTol)) {
        throw std::logic_error(fmt::format("round {}: action leaves the domain by {} ({})", t,
                                           inst.domain().max_violation(a), fmt::join(a.data(), a.data() + a.size(), " ")));
    }
}

// Adds the round's clamped regret and risk to the summary; returns them.
std::pair<double, double> account(RunSummary& s, const SlbInstance& inst, const InstanceSolution& sol, const Vec& a) {
    const double regret = std::max(0.0, reward_gap(inst, sol, a));
    const double risk = std::max(0.0, constraint_violation(inst, a));
    s.R_T += regret;
    s.S_T += risk;
    return {regret, risk};
}

std::pair<double, Vec> feedback(const SlbInstance& inst, const Vec& a, Rng& env) {
    std::normal_distribution<double> normal;
    const double sigma = inst.obs_sigma();
    const double R = inst.theta_star().dot(a) + sigma * normal(env);
    Vec S = inst.phi_star() * a;
    for (Eigen::Index i = 0; i < S.size(); ++i) S[i] += sigma * normal(env);
    return {R, std::move(S)};
}

bool keep_round(const EpisodeOptions& options, long t, long T) {
    return options.thinning > 0 && (t % options.thinning == 0 || t == T);
}

}  // namespace

Episode run_episode(const SlbInstance& inst, const AgentConfig& config, long T, std::uint64_t seed,
                    const EpisodeOptions& options) {
    if (T < 1) throw std::invalid_argument("run_episode: T < 1");
    using Clock = std::chrono::steady_clock;

    const InstanceSolution sol = optimal_action(inst);
    Agent agent(config, inst.domain(), inst.alpha(), inst.a_safe());
    Rng env = environment_rng(seed);
    Rng rng = agent_rng(seed);

    Episode ep;
    RunSummary& s = ep.summary;
    s.seed = seed;
    s.algorithm = std::string(algorithm_name(config.kind));
    s.instance = inst.id();
    s.T = T;

    long n_local = 0, n_global = 0, n_unsat = 0, n_consistent = 0;
    const double d = static_cast<double>(inst.d());
    const bool scolts = config.kind == AlgorithmKind::SColts;

    for (long t = 1; t <= T; ++t) {
        const auto start = Clock::now();
        StepOutcome out = agent.select(rng);
        const auto stop = Clock::now();
        const std::int64_t ns =
            options.record_timing ? std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count() : 0;
        s.wall_ns_total += ns;

        const Vec& a = out.action;
        check_in_domain(inst, a, t);
        const RoundContext& ctx = agent.context();
        const SufficientStats& stats = agent.state().stats;

        if (scolts && !out.fallback && !out.warmup) {
            const double g = pessimistic_violation(ctx.est.phi_hat, inst.alpha(), ctx.est.omega, stats.V_inv(), a);
            if (g > kPessimismTol) {
                throw std::logic_error(fmt::format("round {}: pessimistic constraint violated by {}", t, g));
            }
        }

        std::optional<EventFlags> flags;
        if (options.instrument && out.draw) {
            flags = instrument_round(*out.draw, inst, sol, stats, ctx.est, ctx.B_t);
            ++s.instrumented_rounds;
            n_local += flags->local_optimism;
            n_global += flags->global_optimism;
            n_unsat += flags->unsaturated;
            n_consistent += flags->consistent;
            if (!flags->containments_hold()) ++s.containment_violations;
        }
        if (scolts && !out.warmup) {
            const bool consistent = flags ? flags->consistent : consistency_holds(ctx.est, stats, inst);
            if (consistent && constraint_violation(inst, a) > kTrueSafetyTol) ++s.unsafe_under_consistency;
        }

        const double w_norm = mahalanobis(a, stats.V_inv());
        s.potential_sq += w_norm * w_norm;
        s.potential += w_norm;

        const auto [regret, risk] = account(s, inst, sol, a);
        s.explore_rounds += out.explored;
        s.fallback_rounds += out.fallback;
        s.warmup_rounds += out.warmup;
        s.degraded_rounds += out.degraded;

        const auto [R, S] = feedback(inst, a, env);
        agent.observe(a, R, S);

        if (keep_round(options, t, T)) {
            RoundRecord rec;
            rec.t = t;
            rec.action = a;
            rec.regret = regret;
            rec.risk = risk;
            rec.cum_regret = s.R_T;
            rec.cum_risk = s.S_T;
            rec.flags = flags;
            rec.wall_ns = ns;
            rec.explored = out.explored;
            rec.fallback = out.fallback;
            rec.warmup = out.warmup;
            ep.rounds.push_back(std::move(rec));
        }
    }

    s.wall_ns_per_round = static_cast<double>(s.wall_ns_total) / static_cast<double>(T);
    if (s.instrumented_rounds > 0) {
        const double n = static_cast<double>(s.instrumented_rounds);
        s.rate_local = n_local / n;
        s.rate_global = n_global / n;
        s.rate_unsat = n_unsat / n;
        s.rate_consistent = n_consistent / n;
    }
    s.gamma0 = agent.gamma0();

    const double Td = static_cast<double>(T);
    s.potential_sq_bound = 2.0 * d * std::log(1.0 + Td / d);
    s.potential_bound = std::sqrt(2.0 * d * Td * std::log(1.0 + Td / d));
    s.potential_ok = s.potential_sq <= s.potential_sq_bound && s.potential <= s.potential_bound;
    return ep;
}

Episode run_policy(const SlbInstance& inst, const std::function<Vec(long)>& policy, long T, std::uint64_t seed,
                   const EpisodeOptions& options) {
    if (T < 1) throw std::invalid_argument("run_policy: T < 1");
    const InstanceSolution sol = optimal_action(inst);
    Rng env = environment_rng(seed);
    Episode ep;
    RunSummary& s = ep.summary;
    s.seed = seed;
    s.algorithm = "fixed";
    s.instance = inst.id();
    s.T = T;
    for (long t = 1; t <= T; ++t) {
        const Vec a = policy(t);
        check_in_domain(inst, a, t);
        const auto [regret, risk] = account(s, inst, sol, a);
        feedback(inst, a, env);
        if (keep_round(options, t, T)) {
            RoundRecord rec;
            rec.t = t;
            rec.action = a;
            rec.regret = regret;
            rec.risk = risk;
            rec.cum_regret = s.R_T;
            rec.cum_risk = s.S_T;
            ep.rounds.push_back(std::move(rec));
        }
    }
    return ep;
}

std::vector<Episode> run_batch(const SlbInstance& inst, const AgentConfig& config, long T,
                               const std::vector<std::uint64_t>& seeds, const EpisodeOptions& options,
                               unsigned threads) {
    std::vector<Episode> out(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    std::atomic<size_t> next{0};

    const auto worker = [&] {
        for (size_t i = next++; i < seeds.size(); i = next++) {
            try {
                out[i] = run_episode(inst, config, T, seeds[i], options);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(seeds.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (size_t i = 0; i < seeds.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            throw EpisodeError(seeds[i], e.what());
        }
    }
    return out;
}

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd r;
    if (xs.empty()) return r;
    for (double x : xs) r.mean += x;
    r.mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return r;
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    return r;
}

}  // namespace colts
