#pragma once

#include "colts/algorithms.hpp"
#include "colts/events.hpp"
#include "colts/instance.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace colts {

struct RoundRecord {
    long t = 0;
    Vec action;
    double regret = 0.0;  // (gap)_+
    double risk = 0.0;    // (max violation)_+
    double cum_regret = 0.0;
    double cum_risk = 0.0;
    std::optional<EventFlags> flags;
    std::int64_t wall_ns = 0;
    bool explored = false;
    bool fallback = false;
    bool warmup = false;
};

struct RunSummary {
    std::uint64_t seed = 0;
    std::string algorithm;
    std::string instance;
    long T = 0;
    double R_T = 0.0;
    double S_T = 0.0;
    std::int64_t wall_ns_total = 0;
    double wall_ns_per_round = 0.0;

    // Event rates over instrumented rounds; empty when instrumentation is off.
    long instrumented_rounds = 0;
    std::optional<double> rate_local;
    std::optional<double> rate_global;
    std::optional<double> rate_unsat;
    std::optional<double> rate_consistent;
    long containment_violations = 0;
    /// Rounds where S-COLTS played an action that was truly unsafe while the
    /// confidence sets held.
    long unsafe_under_consistency = 0;

    long explore_rounds = 0;
    long fallback_rounds = 0;
    long warmup_rounds = 0;
    long degraded_rounds = 0;
    std::optional<double> gamma0;

    // Elliptical potential at T, with the bounds it is checked against.
    double potential_sq = 0.0;
    double potential_sq_bound = 0.0;
    double potential = 0.0;
    double potential_bound = 0.0;
    bool potential_ok = true;
};

struct EpisodeOptions {
    /// Keep every k-th round record (plus round T); 0 keeps none.
    long thinning = 0;
    bool instrument = false;
    /// When false the wall-time fields are zero, so outputs are reproducible.
    bool record_timing = true;
};

struct Episode {
    RunSummary summary;
    std::vector<RoundRecord> rounds;
};

class EpisodeError : public std::runtime_error {
public:
    EpisodeError(std::uint64_t seed, const std::string& what);
    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

/// Independent streams for the environment noise and the agent's perturbations.
Rng environment_rng(std::uint64_t seed);
Rng agent_rng(std::uint64_t seed);

/// Plays T rounds. Deterministic in (inst, config, T, seed, options).
/// Throws std::logic_error if the agent leaves the domain by more than 1e-6.
Episode run_episode(const SlbInstance& inst, const AgentConfig& config, long T, std::uint64_t seed,
                    const EpisodeOptions& options = {});

/// Environment loop for a scripted policy a_t = policy(t): same feedback and
/// metrics as run_episode, no learner.
Episode run_policy(const SlbInstance& inst, const std::function<Vec(long)>& policy, long T, std::uint64_t seed,
                   const EpisodeOptions& options = {});

/// Runs one episode per seed on up to `threads` workers; the output is in seed
/// order. The first failure is rethrown as EpisodeError naming its seed.
std::vector<Episode> run_batch(const SlbInstance& inst, const AgentConfig& config, long T,
                               const std::vector<std::uint64_t>& seeds, const EpisodeOptions& options = {},
                               unsigned threads = 1);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation; 0 for a single value
};

MeanStd mean_std(const std::vector<double>& xs);

}  // namespace colts
