#include "colts/instance.hpp"

#include "colts/optim.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/core.h>

namespace colts {

namespace {

constexpr double kNormSlack = 1e-12;

Mat empty_rows(Eigen::Index d) { return Mat(0, d); }

}  // namespace

SlbInstance::SlbInstance(std::string id, Vec theta_star, Mat phi_star, Vec alpha, Polytope domain,
                         std::optional<Vec> a_safe, double obs_sigma)
    : id_(std::move(id)), theta_star_(std::move(theta_star)), phi_star_(std::move(phi_star)),
      alpha_(std::move(alpha)), domain_(std::move(domain)), a_safe_(std::move(a_safe)), obs_sigma_(obs_sigma) {
    const Eigen::Index d = theta_star_.size();
    if (d < 1) throw InstanceError("instance: empty theta_star");
    if (phi_star_.cols() != d || phi_star_.rows() != alpha_.size() || phi_star_.rows() < 1) {
        throw InstanceError("instance: phi_star must be m x d with m = len(alpha) >= 1");
    }
    if (domain_.dim() != d || domain_.upper.size() != d || domain_.G.cols() != d ||
        domain_.G.rows() != domain_.h.size()) {
        throw InstanceError("instance: domain dimension mismatch");
    }
    if (!(obs_sigma_ >= 0.0)) throw InstanceError("instance: obs_sigma must be nonnegative");
    if (theta_star_.norm() > 1.0 + kNormSlack) throw InstanceError("instance: ||theta_star|| > 1");
    for (Eigen::Index i = 0; i < phi_star_.rows(); ++i) {
        if (phi_star_.row(i).norm() > 1.0 + kNormSlack) {
            throw InstanceError(fmt::format("instance: row {} of phi_star has norm > 1", i));
        }
    }

    try {
        for (Eigen::Index j = 0; j < d; ++j) {
            for (double sign : {1.0, -1.0}) {
                const Vec e = sign * Vec::Unit(d, j);
                if (!solve_lp(e, domain_, empty_rows(d), Vec(0)).optimal()) {
                    throw InstanceError("instance: domain is empty");
                }
            }
        }
    } catch (const SolverError&) {
        throw InstanceError("instance: domain is unbounded");
    }
    if (!solve_lp(Vec::Zero(d), domain_, phi_star_, alpha_).optimal()) {
        throw InstanceError("instance: true program is infeasible");
    }
    if (a_safe_) {
        if (a_safe_->size() != d) throw InstanceError("instance: a_safe dimension mismatch");
        if (!domain_.contains(*a_safe_, 1e-12)) throw InstanceError("instance: a_safe outside the domain");
        if (!(safety_margin(*this, *a_safe_) > 0.0)) throw InstanceError("instance: a_safe has no safety margin");
    }
}

SlbInstance SlbInstance::with_sigma(double sigma) const {
    return SlbInstance(id_, theta_star_, phi_star_, alpha_, domain_, a_safe_, sigma);
}

InstanceSolution optimal_action(const SlbInstance& inst) {
    const LpResult lp = solve_lp(inst.theta_star(), inst.domain(), inst.phi_star(), inst.alpha(), 1e-9);
    if (!lp.optimal()) throw InstanceError("optimal_action: true program is infeasible");
    InstanceSolution sol;
    sol.a_star = lp.x;
    sol.value_star = inst.theta_star().dot(lp.x);
    if (inst.a_safe()) sol.gamma_safe = safety_margin(inst, *inst.a_safe());
    return sol;
}

double reward_gap(const SlbInstance& inst, const InstanceSolution& sol, const Vec& a) {
    if (a.size() != inst.d()) throw DimensionError("reward_gap: dimension mismatch");
    return sol.value_star - inst.theta_star().dot(a);
}

double safety_margin(const SlbInstance& inst, const Vec& a) {
    if (a.size() != inst.d()) throw DimensionError("safety_margin: dimension mismatch");
    return std::max(0.0, (inst.alpha() - inst.phi_star() * a).minCoeff());
}

double constraint_violation(const SlbInstance& inst, const Vec& a) {
    if (a.size() != inst.d()) throw DimensionError("constraint_violation: dimension mismatch");
    return std::max(0.0, (inst.phi_star() * a - inst.alpha()).maxCoeff());
}

SlbInstance builtin_box_instance(std::uint64_t seed, double sigma) {
    constexpr int d = 9;
    const double side = 1.0 / std::sqrt(static_cast<double>(d));
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution fill(0.6);
    Mat phi(d, d);
    for (int i = 0; i < d; ++i) {
        do {
            for (int j = 0; j < d; ++j) phi(i, j) = fill(rng) ? 1.0 : 0.0;
        } while (phi.row(i).sum() == 0.0);
        phi.row(i) /= phi.row(i).norm();
    }
    return SlbInstance(fmt::format("box9-s{}", seed), Vec::Constant(d, side), std::move(phi),
                       Vec::Constant(d, 0.8 * side), Polytope::box(d, 0.0, side), Vec::Zero(d), sigma);
}

SlbInstance builtin_polygon_instance(int m, double sigma) {
    if (m < 1 || m == 2) throw InstanceError(fmt::format("polygon instance: m = {} (need m = 1 or m >= 3)", m));
    const double radius = 0.2 / std::numbers::sqrt2;
    const double half = 1.0 / std::numbers::sqrt2;
    Mat phi(m, 2);
    Vec alpha(m);
    if (m == 1) {
        phi << 1.0, 0.0;
        alpha << radius;
    } else {
        // Edge k joins vertices at angles 2 pi k / m and 2 pi (k + 1) / m.
        const double apothem = radius * std::cos(std::numbers::pi / m);
        for (int k = 0; k < m; ++k) {
            const double angle = std::numbers::pi * (2.0 * k + 1.0) / m;
            phi(k, 0) = std::cos(angle);
            phi(k, 1) = std::sin(angle);
            alpha[k] = apothem;
        }
    }
    return SlbInstance(fmt::format("polygon-m{}", m), Vec::Unit(2, 0), std::move(phi), std::move(alpha),
                       Polytope::box(2, -half, half), Vec::Zero(2), sigma);
}

namespace {

std::string encode(const Eigen::Ref<const Vec>& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i > 0) out += ' ';
        out += fmt::format("{:.17g}", v[i]);
    }
    return out;
}

Vec decode(const std::string& text, Eigen::Index expected, const std::string& key) {
    std::istringstream in(text);
    std::vector<double> vals;
    std::string tok;
    while (in >> tok) {
        if (tok == "inf") vals.push_back(std::numeric_limits<double>::infinity());
        else if (tok == "-inf") vals.push_back(-std::numeric_limits<double>::infinity());
        else {
            try {
                vals.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw InstanceError(fmt::format("instance file: bad number '{}' in {}", tok, key));
            }
        }
    }
    if (static_cast<Eigen::Index>(vals.size()) != expected) {
        throw InstanceError(fmt::format("instance file: {} has {} values, expected {}", key, vals.size(), expected));
    }
    return Eigen::Map<Vec>(vals.data(), expected);
}

}  // namespace

void save_instance(const SlbInstance& inst, const std::filesystem::path& path) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    tree.put("instance.id", inst.id());
    tree.put("instance.d", inst.d());
    tree.put("instance.m", inst.m());
    tree.put("instance.sigma", fmt::format("{:.17g}", inst.obs_sigma()));
    tree.put("instance.theta", encode(inst.theta_star()));
    tree.put("instance.alpha", encode(inst.alpha()));
    for (Eigen::Index i = 0; i < inst.m(); ++i) {
        tree.put(fmt::format("instance.phi{}", i), encode(inst.phi_star().row(i).transpose()));
    }
    if (inst.a_safe()) tree.put("instance.a_safe", encode(*inst.a_safe()));
    const Polytope& dom = inst.domain();
    tree.put("domain.rows", dom.num_rows());
    tree.put("domain.lower", encode(dom.lower));
    tree.put("domain.upper", encode(dom.upper));
    if (dom.num_rows() > 0) tree.put("domain.h", encode(dom.h));
    for (Eigen::Index i = 0; i < dom.num_rows(); ++i) {
        tree.put(fmt::format("domain.g{}", i), encode(dom.G.row(i).transpose()));
    }
    pt::write_ini(path.string(), tree);
}

SlbInstance load_instance(const std::filesystem::path& path) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
        const auto d = tree.get<Eigen::Index>("instance.d");
        const auto m = tree.get<Eigen::Index>("instance.m");
        if (d < 1 || m < 1) throw InstanceError("instance file: d and m must be positive");
        Mat phi(m, d);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto key = fmt::format("instance.phi{}", i);
            phi.row(i) = decode(tree.get<std::string>(key), d, key).transpose();
        }
        std::optional<Vec> a_safe;
        if (auto s = tree.get_optional<std::string>("instance.a_safe")) a_safe = decode(*s, d, "a_safe");
        const auto rows = tree.get<Eigen::Index>("domain.rows", 0);
        Polytope dom{Mat(rows, d), Vec(rows), decode(tree.get<std::string>("domain.lower"), d, "lower"),
                     decode(tree.get<std::string>("domain.upper"), d, "upper")};
        if (rows > 0) dom.h = decode(tree.get<std::string>("domain.h"), rows, "h");
        for (Eigen::Index i = 0; i < rows; ++i) {
            const auto key = fmt::format("domain.g{}", i);
            dom.G.row(i) = decode(tree.get<std::string>(key), d, key).transpose();
        }
        return SlbInstance(tree.get<std::string>("instance.id", path.stem().string()),
                           decode(tree.get<std::string>("instance.theta"), d, "theta"), std::move(phi),
                           decode(tree.get<std::string>("instance.alpha"), m, "alpha"), std::move(dom),
                           std::move(a_safe), tree.get<double>("instance.sigma", 1.0));
    } catch (const pt::ptree_error& e) {
        throw InstanceError(fmt::format("instance file {}: {}", path.string(), e.what()));
    }
}

}  // namespace colts
