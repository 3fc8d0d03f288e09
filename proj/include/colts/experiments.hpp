#pragma once

#include "colts/algorithms.hpp"
#include "colts/instance.hpp"
#include "colts/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace colts {

/// Invalid or missing configuration; the CLI maps it to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Command { Run, SweepGamma, SweepM, ResamplingTable, Rates, HardCompare, DecoupledStudy };

std::string_view command_name(Command c);
Command parse_command(std::string_view name);

struct InstanceSpec {
    std::string builtin;  // "box9" or "polygon"; empty when loading a file
    std::filesystem::path file;
    std::uint64_t seed = kDefaultBoxSeed;
    int m = 10;
    double sigma = 1.0;
};

struct AlgorithmSpec {
    AlgorithmKind kind = AlgorithmKind::SColts;
    std::string preset = "practical";  // or "theory"
    double delta = 0.1;
    std::optional<double> gamma;
    BaseMeasure base = BaseMeasure::Sphere;
    NoiseDesign design = NoiseDesign::Coupled;
    std::optional<int> resampling_order;
    int samples_fixed = 0;
    Gamma0Mode gamma0_mode = Gamma0Mode::Auto;
    double gamma0_known = 0.0;
};

struct SweepSpec {
    std::optional<double> gamma_min;
    std::optional<double> gamma_max;
    int gamma_points = 41;
    std::vector<int> m_values{1, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    std::vector<int> samples{1, 2, 3};
    long long_T = 10000;
};

struct ExperimentConfig {
    std::optional<Command> command;
    InstanceSpec instance;
    AlgorithmSpec algorithm;
    SweepSpec sweep;
    long T = 1000;
    std::vector<std::uint64_t> seeds{1};
    std::filesystem::path out = ".";
    long thinning = 0;
    bool instrument = false;
    bool record_timing = true;
    unsigned threads = 1;
};

/// Reads an INI file with sections [experiment], [instance], [algorithm], [sweep].
ExperimentConfig load_config(const std::filesystem::path& path);

/// Checks the invariants (delta in (0,1), T >= 1, distinct seeds, known builtins).
void validate(const ExperimentConfig& cfg);

SlbInstance make_instance(const InstanceSpec& spec);

/// Agent configuration for the given instance dimensions, applying the preset:
/// "theory" uses the sphere of radius sqrt(3d), r = 4, and the per-algorithm
/// delta split (delta/3 for S-COLTS and E-COLTS, delta/2 for R-COLTS);
/// "practical" uses radius 0.5 and the given delta unchanged.
AgentConfig make_agent_config(const AlgorithmSpec& spec, Eigen::Index d, Eigen::Index m);

/// n log-spaced points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int n);

/// Default sweep endpoints: (3d)^{-3/2} and sqrt(3d).
double default_gamma_min(Eigen::Index d);
double default_gamma_max(Eigen::Index d);

void write_summary_csv(std::ostream& os, const std::vector<Episode>& episodes);
void write_rounds_csv(std::ostream& os, const std::vector<Episode>& episodes);

/// Bit layout of the `flags` column of the rounds CSV.
enum RoundFlag : unsigned {
    kFlagExplored = 1u << 0,
    kFlagFallback = 1u << 1,
    kFlagWarmup = 1u << 2,
    kFlagInstrumented = 1u << 3,
    kFlagConsistent = 1u << 4,
    kFlagLocal = 1u << 5,
    kFlagGlobal = 1u << 6,
    kFlagUnsaturated = 1u << 7,
    kFlagFeasible = 1u << 8,
};
unsigned round_flags(const RoundRecord& r);

/// Runs a command, writing CSVs under cfg.out and a short report to `log`.
/// Returns 0; errors propagate as exceptions.
int run_command(Command cmd, const ExperimentConfig& cfg, std::ostream& log);

}  // namespace colts
