#include "colts/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/core.h>
#include <fmt/ostream.h>

namespace colts {

namespace pt = boost::property_tree;

std::string_view command_name(Command c) {
    switch (c) {
        case Command::Run: return "run";
        case Command::SweepGamma: return "sweep_gamma";
        case Command::SweepM: return "sweep_m";
        case Command::ResamplingTable: return "resampling_table";
        case Command::Rates: return "rates";
        case Command::HardCompare: return "hard_compare";
        case Command::DecoupledStudy: return "decoupled_study";
    }
    return "?";
}

Command parse_command(std::string_view name) {
    for (auto c : {Command::Run, Command::SweepGamma, Command::SweepM, Command::ResamplingTable, Command::Rates,
                   Command::HardCompare, Command::DecoupledStudy}) {
        if (command_name(c) == name) return c;
    }
    throw ConfigError(fmt::format("unknown command '{}'", name));
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Drops a trailing "; comment" or "# comment" that follows whitespace.
std::string strip_comment(const std::string& s) {
    for (size_t i = 1; i < s.size(); ++i) {
        if ((s[i] == ';' || s[i] == '#') && (s[i - 1] == ' ' || s[i - 1] == '\t')) return s.substr(0, i);
    }
    return s;
}

std::vector<std::string> split_list(const std::string& s) {
    std::string norm = s;
    std::replace(norm.begin(), norm.end(), ',', ' ');
    std::istringstream is(norm);
    std::vector<std::string> out;
    for (std::string tok; is >> tok;) out.push_back(tok);
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    std::istringstream is(trim(text));
    T v{};
    if (!(is >> v) || !is.eof()) throw ConfigError(fmt::format("{}: cannot parse '{}'", key, text));
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError(fmt::format("{}: expected a boolean, got '{}'", key, text));
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
    std::vector<T> out;
    for (const auto& tok : split_list(text)) out.push_back(parse_number<T>(key, tok));
    if (out.empty()) throw ConfigError(fmt::format("{}: empty list", key));
    return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"experiment",
         {"command", "T", "seeds", "num_seeds", "out", "thinning", "instrument", "record_timing", "threads"}},
        {"instance", {"builtin", "file", "seed", "m", "sigma"}},
        {"algorithm",
         {"name", "preset", "delta", "gamma", "base", "design", "resampling_order", "samples", "gamma0"}},
        {"sweep", {"gamma_min", "gamma_max", "gamma_points", "m_values", "samples", "long_T"}},
    };
    return keys;
}

}  // namespace

ExperimentConfig load_config(const std::filesystem::path& path) {
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(fmt::format("cannot read config '{}': {}", path.string(), e.what()));
    }
    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        if (it == known_keys().end() || body.empty()) {
            throw ConfigError(fmt::format("unknown section [{}]", section));
        }
        for (const auto& [key, _] : body) {
            if (!it->second.count(key)) throw ConfigError(fmt::format("unknown key [{}] {}", section, key));
        }
    }
    const auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
        auto v = tree.get_optional<std::string>(pt::ptree::path_type(section + "." + key, '.'));
        if (!v) return std::nullopt;
        return trim(strip_comment(*v));
    };

    ExperimentConfig cfg;
    if (auto v = get("experiment", "command")) cfg.command = parse_command(*v);
    if (auto v = get("experiment", "T")) cfg.T = parse_number<long>("T", *v);
    if (auto v = get("experiment", "seeds")) cfg.seeds = parse_list<std::uint64_t>("seeds", *v);
    if (auto v = get("experiment", "num_seeds")) {
        if (get("experiment", "seeds")) throw ConfigError("give either seeds or num_seeds, not both");
        const long n = parse_number<long>("num_seeds", *v);
        if (n < 1) throw ConfigError("num_seeds must be >= 1");
        cfg.seeds.clear();
        for (long i = 1; i <= n; ++i) cfg.seeds.push_back(static_cast<std::uint64_t>(i));
    }
    if (auto v = get("experiment", "out")) cfg.out = *v;
    if (auto v = get("experiment", "thinning")) cfg.thinning = parse_number<long>("thinning", *v);
    if (auto v = get("experiment", "instrument")) cfg.instrument = parse_bool("instrument", *v);
    if (auto v = get("experiment", "record_timing")) cfg.record_timing = parse_bool("record_timing", *v);
    if (auto v = get("experiment", "threads")) cfg.threads = parse_number<unsigned>("threads", *v);

    InstanceSpec& in = cfg.instance;
    in.builtin.clear();
    if (auto v = get("instance", "builtin")) in.builtin = *v;
    if (auto v = get("instance", "file")) {
        in.file = *v;
        if (!path.parent_path().empty() && in.file.is_relative()) in.file = path.parent_path() / in.file;
    }
    if (auto v = get("instance", "seed")) in.seed = parse_number<std::uint64_t>("seed", *v);
    if (auto v = get("instance", "m")) in.m = parse_number<int>("m", *v);
    if (auto v = get("instance", "sigma")) in.sigma = parse_number<double>("sigma", *v);

    AlgorithmSpec& al = cfg.algorithm;
    try {
        if (auto v = get("algorithm", "name")) al.kind = parse_algorithm(*v);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (auto v = get("algorithm", "preset")) al.preset = *v;
    if (auto v = get("algorithm", "delta")) al.delta = parse_number<double>("delta", *v);
    if (auto v = get("algorithm", "gamma")) al.gamma = parse_number<double>("gamma", *v);
    if (auto v = get("algorithm", "base")) {
        if (*v == "sphere") {
            al.base = BaseMeasure::Sphere;
        } else if (*v == "gaussian") {
            al.base = BaseMeasure::Gaussian;
        } else {
            throw ConfigError(fmt::format("base: expected sphere or gaussian, got '{}'", *v));
        }
    }
    if (auto v = get("algorithm", "design")) {
        if (*v == "coupled") {
            al.design = NoiseDesign::Coupled;
        } else if (*v == "decoupled") {
            al.design = NoiseDesign::Decoupled;
        } else {
            throw ConfigError(fmt::format("design: expected coupled or decoupled, got '{}'", *v));
        }
    }
    if (auto v = get("algorithm", "resampling_order")) al.resampling_order = parse_number<int>("resampling_order", *v);
    if (auto v = get("algorithm", "samples")) al.samples_fixed = parse_number<int>("samples", *v);
    if (auto v = get("algorithm", "gamma0")) {
        if (*v == "auto") {
            al.gamma0_mode = Gamma0Mode::Auto;
        } else if (*v == "estimate") {
            al.gamma0_mode = Gamma0Mode::Estimate;
        } else {
            al.gamma0_mode = Gamma0Mode::Known;
            al.gamma0_known = parse_number<double>("gamma0", *v);
        }
    }

    SweepSpec& sw = cfg.sweep;
    if (auto v = get("sweep", "gamma_min")) sw.gamma_min = parse_number<double>("gamma_min", *v);
    if (auto v = get("sweep", "gamma_max")) sw.gamma_max = parse_number<double>("gamma_max", *v);
    if (auto v = get("sweep", "gamma_points")) sw.gamma_points = parse_number<int>("gamma_points", *v);
    if (auto v = get("sweep", "m_values")) sw.m_values = parse_list<int>("m_values", *v);
    if (auto v = get("sweep", "samples")) sw.samples = parse_list<int>("samples", *v);
    if (auto v = get("sweep", "long_T")) sw.long_T = parse_number<long>("long_T", *v);
    return cfg;
}

void validate(const ExperimentConfig& cfg) {
    const auto& in = cfg.instance;
    if (in.builtin.empty() == in.file.empty()) {
        throw ConfigError("[instance] needs exactly one of builtin or file");
    }
    if (!in.builtin.empty() && in.builtin != "box9" && in.builtin != "polygon") {
        throw ConfigError(fmt::format("unknown builtin instance '{}' (known: box9, polygon)", in.builtin));
    }
    if (!(in.sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
    const auto& al = cfg.algorithm;
    if (!(al.delta > 0.0 && al.delta < 1.0)) throw ConfigError(fmt::format("delta = {} not in (0, 1)", al.delta));
    if (al.preset != "practical" && al.preset != "theory") {
        throw ConfigError(fmt::format("preset: expected practical or theory, got '{}'", al.preset));
    }
    if (al.gamma && !(*al.gamma > 0.0)) throw ConfigError("gamma must be > 0");
    if (al.resampling_order && *al.resampling_order < 0) throw ConfigError("resampling_order must be >= 0");
    if (al.samples_fixed < 0) throw ConfigError("samples must be >= 0");
    if (al.gamma0_mode == Gamma0Mode::Known && !(al.gamma0_known > 0.0)) throw ConfigError("gamma0 must be > 0");
    if (cfg.T < 1) throw ConfigError("T must be >= 1");
    if (cfg.seeds.empty()) throw ConfigError("no seeds");
    std::set<std::uint64_t> distinct(cfg.seeds.begin(), cfg.seeds.end());
    if (distinct.size() != cfg.seeds.size()) throw ConfigError("seeds must be distinct");
    if (cfg.thinning < 0) throw ConfigError("thinning must be >= 0");
    if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
    const auto& sw = cfg.sweep;
    if (sw.gamma_points < 2) throw ConfigError("gamma_points must be >= 2");
    if ((sw.gamma_min && !(*sw.gamma_min > 0.0)) || (sw.gamma_max && !(*sw.gamma_max > 0.0))) {
        throw ConfigError("gamma sweep bounds must be > 0");
    }
    if (sw.gamma_min && sw.gamma_max && *sw.gamma_min > *sw.gamma_max) throw ConfigError("gamma_min > gamma_max");
    for (int m : sw.m_values) {
        if (m < 1 || m == 2) throw ConfigError(fmt::format("m_values: polygon needs m = 1 or m >= 3, got {}", m));
    }
    for (int k : sw.samples) {
        if (k < 1) throw ConfigError("samples list entries must be >= 1");
    }
    if (sw.long_T < 1) throw ConfigError("long_T must be >= 1");
}

SlbInstance make_instance(const InstanceSpec& spec) {
    if (!spec.file.empty()) return load_instance(spec.file).with_sigma(spec.sigma);
    if (spec.builtin == "box9") return builtin_box_instance(spec.seed, spec.sigma);
    if (spec.builtin == "polygon") return builtin_polygon_instance(spec.m, spec.sigma);
    throw ConfigError(fmt::format("unknown builtin instance '{}'", spec.builtin));
}

AgentConfig make_agent_config(const AlgorithmSpec& spec, Eigen::Index d, Eigen::Index m) {
    const bool theory = spec.preset == "theory";
    AgentConfig c;
    c.kind = spec.kind;
    c.law = theory ? PerturbationLaw::theory(d, m, spec.design) : PerturbationLaw::practical(d, m, spec.design);
    c.law.base = spec.base;
    if (spec.gamma) c.law.gamma = *spec.gamma;
    c.delta = spec.delta;
    if (theory) {
        if (spec.kind == AlgorithmKind::SColts || spec.kind == AlgorithmKind::EColts) c.delta = spec.delta / 3.0;
        if (spec.kind == AlgorithmKind::RColts) c.delta = spec.delta / 2.0;
    }
    c.resampling_order = spec.resampling_order.value_or(theory ? 4 : 0);
    c.samples_fixed = spec.samples_fixed;
    c.gamma0_mode = spec.gamma0_mode;
    c.gamma0_known = spec.gamma0_known;
    return c;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0 && hi >= lo) || n < 2) throw std::invalid_argument("log_grid: need 0 < lo <= hi and n >= 2");
    std::vector<double> out(static_cast<size_t>(n));
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

double default_gamma_min(Eigen::Index d) { return std::pow(3.0 * static_cast<double>(d), -1.5); }
double default_gamma_max(Eigen::Index d) { return std::sqrt(3.0 * static_cast<double>(d)); }

namespace {

std::string opt_num(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }

}  // namespace

void write_summary_csv(std::ostream& os, const std::vector<Episode>& episodes) {
    os << "seed,algo,instance,T,R_T,S_T,wall_ns_total,wall_ns_per_round,rate_local,rate_global,rate_unsat\n";
    for (const auto& e : episodes) {
        const RunSummary& s = e.summary;
        fmt::print(os, "{},{},{},{},{},{},{},{},{},{},{}\n", s.seed, s.algorithm, s.instance, s.T, s.R_T, s.S_T,
                   s.wall_ns_total, s.wall_ns_per_round, opt_num(s.rate_local), opt_num(s.rate_global),
                   opt_num(s.rate_unsat));
    }
}

unsigned round_flags(const RoundRecord& r) {
    unsigned f = 0;
    if (r.explored) f |= kFlagExplored;
    if (r.fallback) f |= kFlagFallback;
    if (r.warmup) f |= kFlagWarmup;
    if (r.flags) {
        f |= kFlagInstrumented;
        if (r.flags->consistent) f |= kFlagConsistent;
        if (r.flags->local_optimism) f |= kFlagLocal;
        if (r.flags->global_optimism) f |= kFlagGlobal;
        if (r.flags->unsaturated) f |= kFlagUnsaturated;
        if (r.flags->perturbed_feasible) f |= kFlagFeasible;
    }
    return f;
}

void write_rounds_csv(std::ostream& os, const std::vector<Episode>& episodes) {
    os << "seed,t,cum_regret,cum_risk,flags\n";
    for (const auto& e : episodes) {
        for (const auto& r : e.rounds) {
            fmt::print(os, "{},{},{},{},{}\n", e.summary.seed, r.t, r.cum_regret, r.cum_risk, round_flags(r));
        }
    }
}

namespace {

struct Runner {
    const ExperimentConfig& cfg;
    std::ostream& log;

    EpisodeOptions options(bool instrument) const {
        EpisodeOptions o;
        o.thinning = cfg.thinning;
        o.instrument = instrument;
        o.record_timing = cfg.record_timing;
        return o;
    }

    std::vector<Episode> batch(const SlbInstance& inst, const AgentConfig& ac, long T, bool instrument) const {
        return run_batch(inst, ac, T, cfg.seeds, options(instrument), cfg.threads);
    }

    std::ofstream open(const std::string& name) const {
        std::filesystem::create_directories(cfg.out);
        const auto p = cfg.out / name;
        std::ofstream os(p);
        if (!os) throw std::runtime_error(fmt::format("cannot write '{}'", p.string()));
        return os;
    }

    void check_potential(const std::vector<Episode>& eps) const {
        for (const auto& e : eps) {
            if (!e.summary.potential_ok) {
                fmt::print(log, "warning: seed {} violates the elliptical potential bound\n", e.summary.seed);
            }
            if (e.summary.containment_violations > 0) {
                fmt::print(log, "warning: seed {} has {} event containment violations\n", e.summary.seed,
                           e.summary.containment_violations);
            }
        }
    }
};

template <class F>
std::vector<double> collect(const std::vector<Episode>& eps, F f) {
    std::vector<double> out;
    for (const auto& e : eps) {
        if (auto v = f(e.summary)) out.push_back(*v);
    }
    return out;
}

MeanStd stat(const std::vector<Episode>& eps, std::optional<double> RunSummary::*field) {
    return mean_std(collect(eps, [&](const RunSummary& s) { return s.*field; }));
}

MeanStd stat(const std::vector<Episode>& eps, double RunSummary::*field) {
    return mean_std(collect(eps, [&](const RunSummary& s) { return std::optional<double>(s.*field); }));
}

std::string rate_columns(const std::vector<Episode>& eps) {
    const MeanStd l = stat(eps, &RunSummary::rate_local);
    const MeanStd g = stat(eps, &RunSummary::rate_global);
    const MeanStd u = stat(eps, &RunSummary::rate_unsat);
    return fmt::format("{},{},{},{},{},{}", l.mean, l.std, g.mean, g.std, u.mean, u.std);
}

int cmd_run(const Runner& run) {
    const SlbInstance inst = make_instance(run.cfg.instance);
    const AgentConfig ac = make_agent_config(run.cfg.algorithm, inst.d(), inst.m());
    const auto eps = run.batch(inst, ac, run.cfg.T, run.cfg.instrument);
    run.check_potential(eps);
    {
        auto os = run.open("summary.csv");
        write_summary_csv(os, eps);
    }
    if (run.cfg.thinning > 0) {
        auto os = run.open("rounds.csv");
        write_rounds_csv(os, eps);
    }
    const MeanStd R = stat(eps, &RunSummary::R_T);
    const MeanStd S = stat(eps, &RunSummary::S_T);
    fmt::print(run.log, "{} on {}: R_T = {:.4g} +- {:.4g}, S_T = {:.4g} +- {:.4g} over {} runs\n",
               algorithm_name(ac.kind), inst.id(), R.mean, R.std, S.mean, S.std, eps.size());
    return 0;
}

int cmd_sweep_gamma(const Runner& run) {
    const SlbInstance inst = make_instance(run.cfg.instance);
    const auto& sw = run.cfg.sweep;
    const double lo = sw.gamma_min.value_or(default_gamma_min(inst.d()));
    const double hi = sw.gamma_max.value_or(default_gamma_max(inst.d()));
    auto os = run.open("sweep_gamma.csv");
    os << "gamma,rate_local,rate_local_std,rate_global,rate_global_std,rate_unsat,rate_unsat_std,regret_mean,"
          "regret_std\n";
    for (double g : log_grid(lo, hi, sw.gamma_points)) {
        AlgorithmSpec spec = run.cfg.algorithm;
        spec.gamma = g;
        const AgentConfig ac = make_agent_config(spec, inst.d(), inst.m());
        const auto eps = run.batch(inst, ac, run.cfg.T, true);
        run.check_potential(eps);
        const MeanStd R = stat(eps, &RunSummary::R_T);
        fmt::print(os, "{},{},{},{}\n", g, rate_columns(eps), R.mean, R.std);
    }
    fmt::print(run.log, "sweep_gamma: {} points on [{:.4g}, {:.4g}] for {}\n", sw.gamma_points, lo, hi, inst.id());
    return 0;
}

void write_rates_rows(const Runner& run, std::ostream& os, NoiseDesign design, long T) {
    for (int m : run.cfg.sweep.m_values) {
        InstanceSpec is = run.cfg.instance;
        is.builtin = "polygon";
        is.file.clear();
        is.m = m;
        const SlbInstance inst = make_instance(is);
        AlgorithmSpec spec = run.cfg.algorithm;
        spec.design = design;
        const AgentConfig ac = make_agent_config(spec, inst.d(), inst.m());
        const auto eps = run.batch(inst, ac, T, true);
        run.check_potential(eps);
        const MeanStd R = stat(eps, &RunSummary::R_T);
        const MeanStd S = stat(eps, &RunSummary::S_T);
        fmt::print(os, "{},{},{},{},{},{},{}\n", design == NoiseDesign::Coupled ? "coupled" : "decoupled", m,
                   rate_columns(eps), R.mean, R.std, S.mean, S.std);
    }
}

constexpr const char* kRatesHeader =
    "design,m,rate_local,rate_local_std,rate_global,rate_global_std,rate_unsat,rate_unsat_std,regret_mean,"
    "regret_std,risk_mean,risk_std\n";

int cmd_rates(const Runner& run) {
    auto os = run.open("rates.csv");
    os << kRatesHeader;
    if (run.cfg.instance.builtin == "polygon") {
        write_rates_rows(run, os, run.cfg.algorithm.design, run.cfg.T);
    } else {
        const SlbInstance inst = make_instance(run.cfg.instance);
        const AgentConfig ac = make_agent_config(run.cfg.algorithm, inst.d(), inst.m());
        const auto eps = run.batch(inst, ac, run.cfg.T, true);
        run.check_potential(eps);
        const MeanStd R = stat(eps, &RunSummary::R_T);
        const MeanStd S = stat(eps, &RunSummary::S_T);
        fmt::print(os, "{},{},{},{},{},{},{}\n",
                   run.cfg.algorithm.design == NoiseDesign::Coupled ? "coupled" : "decoupled", inst.m(),
                   rate_columns(eps), R.mean, R.std, S.mean, S.std);
    }
    fmt::print(run.log, "rates written to {}\n", (run.cfg.out / "rates.csv").string());
    return 0;
}

int cmd_decoupled_study(const Runner& run) {
    {
        auto os = run.open("decoupled_rates.csv");
        os << kRatesHeader;
        write_rates_rows(run, os, NoiseDesign::Coupled, run.cfg.T);
        write_rates_rows(run, os, NoiseDesign::Decoupled, run.cfg.T);
    }
    std::vector<Episode> all;
    for (int m : run.cfg.sweep.m_values) {
        InstanceSpec is = run.cfg.instance;
        is.builtin = "polygon";
        is.file.clear();
        is.m = m;
        const SlbInstance inst = make_instance(is);
        AlgorithmSpec spec = run.cfg.algorithm;
        spec.design = NoiseDesign::Decoupled;
        const auto eps = run.batch(inst, make_agent_config(spec, inst.d(), inst.m()), run.cfg.sweep.long_T, false);
        run.check_potential(eps);
        all.insert(all.end(), eps.begin(), eps.end());
    }
    auto os = run.open("decoupled_long.csv");
    write_summary_csv(os, all);
    fmt::print(run.log, "decoupled_study: {} m values, long runs of {} rounds\n", run.cfg.sweep.m_values.size(),
               run.cfg.sweep.long_T);
    return 0;
}

int cmd_resampling_table(const Runner& run) {
    const SlbInstance inst = make_instance(run.cfg.instance);
    auto os = run.open("resampling.csv");
    os << "samples,R_mean,R_std,S_mean,S_std\n";
    std::vector<double> means;
    for (int k : run.cfg.sweep.samples) {
        AlgorithmSpec spec = run.cfg.algorithm;
        spec.kind = AlgorithmKind::RColts;
        spec.samples_fixed = k;
        const auto eps = run.batch(inst, make_agent_config(spec, inst.d(), inst.m()), run.cfg.T, run.cfg.instrument);
        run.check_potential(eps);
        const MeanStd R = stat(eps, &RunSummary::R_T);
        const MeanStd S = stat(eps, &RunSummary::S_T);
        fmt::print(os, "{},{},{},{},{}\n", k, R.mean, R.std, S.mean, S.std);
        fmt::print(run.log, "samples {}: R_T = {:.4g} +- {:.4g}, S_T = {:.4g} +- {:.4g}\n", k, R.mean, R.std, S.mean,
                   S.std);
        means.push_back(R.mean);
    }
    const bool decreasing = std::adjacent_find(means.begin(), means.end(), std::less_equal<>()) == means.end();
    fmt::print(run.log, "trend: regret {} in samples\n", decreasing ? "decreasing" : "NOT decreasing");
    return 0;
}

std::pair<std::vector<Episode>, std::vector<Episode>> hard_pair(const Runner& run, const SlbInstance& inst,
                                                                bool keep_rounds) {
    AlgorithmSpec spec = run.cfg.algorithm;
    spec.kind = AlgorithmKind::SColts;
    auto s = run.batch(inst, make_agent_config(spec, inst.d(), inst.m()), run.cfg.T, false);
    spec.kind = AlgorithmKind::SafeLts;
    auto h = run.batch(inst, make_agent_config(spec, inst.d(), inst.m()), run.cfg.T, false);
    run.check_potential(s);
    run.check_potential(h);
    if (!keep_rounds) {
        for (auto* v : {&s, &h}) {
            for (auto& e : *v) e.rounds.clear();
        }
    }
    return {std::move(s), std::move(h)};
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

int cmd_hard_compare(const Runner& run) {
    const SlbInstance inst = make_instance(run.cfg.instance);
    auto [s, h] = hard_pair(run, inst, true);
    {
        std::vector<Episode> both = s;
        both.insert(both.end(), h.begin(), h.end());
        auto os = run.open("hard_compare_summary.csv");
        write_summary_csv(os, both);
    }
    if (run.cfg.thinning > 0) {
        auto os1 = run.open("rounds_s-colts.csv");
        write_rounds_csv(os1, s);
        auto os2 = run.open("rounds_safe-lts.csv");
        write_rounds_csv(os2, h);
    }
    const double ts = stat(s, &RunSummary::wall_ns_per_round).mean;
    const double th = stat(h, &RunSummary::wall_ns_per_round).mean;
    fmt::print(run.log, "hard_compare on {}: R_T s-colts {:.4g}, safe-lts {:.4g}; time ratio safe-lts/s-colts {:.3g}\n",
               inst.id(), stat(s, &RunSummary::R_T).mean, stat(h, &RunSummary::R_T).mean, ratio(th, ts));
    return 0;
}

int cmd_sweep_m(const Runner& run) {
    auto os = run.open("sweep_m.csv");
    os << "m,regret_scolts,regret_safelts,regret_ratio,ns_per_round_scolts,ns_per_round_safelts,time_ratio\n";
    for (int m : run.cfg.sweep.m_values) {
        InstanceSpec is = run.cfg.instance;
        is.builtin = "polygon";
        is.file.clear();
        is.m = m;
        const SlbInstance inst = make_instance(is);
        auto [s, h] = hard_pair(run, inst, false);
        const double rs = stat(s, &RunSummary::R_T).mean;
        const double rh = stat(h, &RunSummary::R_T).mean;
        const double ts = stat(s, &RunSummary::wall_ns_per_round).mean;
        const double th = stat(h, &RunSummary::wall_ns_per_round).mean;
        fmt::print(os, "{},{},{},{},{},{},{}\n", m, rs, rh, ratio(rh, rs), ts, th, ratio(th, ts));
        fmt::print(run.log, "m = {}: regret ratio {:.3g}, time ratio {:.3g}\n", m, ratio(rh, rs), ratio(th, ts));
    }
    return 0;
}

}  // namespace

int run_command(Command cmd, const ExperimentConfig& cfg, std::ostream& log) {
    validate(cfg);
    const Runner run{cfg, log};
    switch (cmd) {
        case Command::Run: return cmd_run(run);
        case Command::SweepGamma: return cmd_sweep_gamma(run);
        case Command::SweepM: return cmd_sweep_m(run);
        case Command::ResamplingTable: return cmd_resampling_table(run);
        case Command::Rates: return cmd_rates(run);
        case Command::HardCompare: return cmd_hard_compare(run);
        case Command::DecoupledStudy: return cmd_decoupled_study(run);
    }
    return 3;
}

}  // namespace colts
