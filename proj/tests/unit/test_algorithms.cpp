#include "colts/algorithms.hpp"
#include "colts/instance.hpp"

#include "oracles.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include <doctest.h>

using namespace colts;

namespace {

// A sphere law so narrow the perturbation is numerically frozen.
PerturbationLaw frozen_law(Eigen::Index d, Eigen::Index m) {
    PerturbationLaw law = PerturbationLaw::practical(d, m);
    law.gamma = 1e-12;
    return law;
}

AgentState fresh_state(AlgorithmKind kind, Eigen::Index d, Eigen::Index m) {
    return AgentState{kind, SufficientStats(d, m), std::nullopt, 0, Vec::Zero(d), 0};
}

RoundContext manual_context(long t, Vec theta_hat, Mat phi_hat, double omega) {
    return RoundContext{t, Estimates{std::move(theta_hat), std::move(phi_hat), omega}, 2.0, 1e-9};
}

// Plays `agent` against `inst` for T rounds and hands every outcome to `visit`.
void drive(Agent& agent, const SlbInstance& inst, long T, std::uint64_t seed,
           const std::function<void(const StepOutcome&, const Agent&)>& visit) {
    Rng env(seed), rng(seed + 1000);
    std::normal_distribution<double> n;
    for (long t = 1; t <= T; ++t) {
        const StepOutcome out = agent.select(rng);
        visit(out, agent);
        Vec S = inst.phi_star() * out.action;
        for (Eigen::Index i = 0; i < S.size(); ++i) S[i] += inst.obs_sigma() * n(env);
        agent.observe(out.action, inst.theta_star().dot(out.action) + inst.obs_sigma() * n(env), S);
    }
}

}  // namespace

TEST_CASE("anytime envelope") {
    CHECK(lil_bound(1.0, 0.1) == doctest::Approx(std::sqrt(4.0 * std::log(10.0))));
    CHECK(lil_bound(1.0, 0.1) == doctest::Approx(3.0349).epsilon(1e-4));
    const double e = std::exp(1.0);
    CHECK(lil_bound(e, 0.2) == doctest::Approx(std::sqrt(4.0 * e * std::log(5.0))));
    double prev = 0.0;
    for (double t = 1.0; t < 1e6; t *= 1.37) {
        CHECK(lil_bound(t, 0.05) > prev);
        prev = lil_bound(t, 0.05);
    }
    CHECK_THROWS_AS(lil_bound(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(lil_bound(0.5, 0.1), std::invalid_argument);
}

TEST_CASE("margin estimator stops when the lower band reaches half the upper band") {
    // LIL(1, delta) = 0.2 exactly.
    const double delta = std::exp(-0.01);
    Gamma0Estimator g(1, delta);
    g.step(Vec{{-0.5}}, Vec{{0.5}});
    REQUIRE(g.done());
    CHECK(g.average()[0] == doctest::Approx(1.0));
    CHECK(g.gamma0() == doctest::Approx(0.8));
    CHECK(g.pulls() == 1);
    CHECK_THROWS_AS(g.step(Vec{{0.0}}, Vec{{0.5}}), std::logic_error);
}

TEST_CASE("margin estimator does not stop on a first average below three bands") {
    const double delta = 0.1;
    const Eigen::Index m = 4;
    const double limit = 3.0 * lil_bound(1.0, delta / static_cast<double>(m));
    for (double av : {0.0, 0.3, 1.0, 0.5 * limit, limit - 1e-9}) {
        Gamma0Estimator g(m, delta);
        g.step(Vec::Zero(m), Vec::Constant(m, av));
        CHECK_FALSE(g.done());
        CHECK_THROWS_AS(g.gamma0(), std::logic_error);
    }
    Gamma0Estimator g(m, delta);
    g.step(Vec::Zero(m), Vec::Constant(m, limit + 1e-9));
    CHECK(g.done());
}

TEST_CASE("noiseless margin estimate lies within a factor two of the true margin") {
    const SlbInstance inst = builtin_box_instance();
    const Vec a_safe = Vec::Constant(9, 0.05);
    const double margin = safety_margin(inst, a_safe);
    REQUIRE(margin > 0.0);
    Gamma0Estimator g(9, 0.1);
    while (!g.done()) g.step(inst.phi_star() * a_safe, inst.alpha());
    CHECK(g.gamma0() >= margin / 2.0 - 1e-12);
    CHECK(g.gamma0() <= margin + 1e-12);
}

TEST_CASE("S-COLTS gate plays the safe action") {
    const Polytope dom = Polytope::box(2, 0.0, 1.0);
    const Vec alpha{{1.0}};
    AgentState st = fresh_state(AlgorithmKind::SColts, 2, 1);
    const RoundContext ctx = manual_context(1, Vec{{1.0, 0.0}}, Mat{{0.1, 0.1}}, 1.0);
    const Vec a_safe{{0.1, 0.1}};
    Rng rng(1);
    const StepOutcome out = scolts_step(st, ctx, frozen_law(2, 1), rng, dom, alpha, a_safe, 1e-3, 1e-9);
    CHECK(out.fallback);
    CHECK(out.action == a_safe);
    CHECK_FALSE(out.b.has_value());
    CHECK(out.draw.has_value());
}

TEST_CASE("S-COLTS plays the safe action when the perturbed program is infeasible") {
    const Polytope dom = Polytope::box(1, 0.5, 1.0);
    const Vec alpha{{0.2}};
    AgentState st = fresh_state(AlgorithmKind::SColts, 1, 1);
    const RoundContext ctx = manual_context(1, Vec{{1.0}}, Mat{{1.0}}, 0.0);
    const Vec a_safe{{0.5}};
    Rng rng(2);
    const StepOutcome out = scolts_step(st, ctx, frozen_law(1, 1), rng, dom, alpha, a_safe,
                                        std::numeric_limits<double>::infinity(), 1e-9);
    CHECK(out.fallback);
    CHECK(out.action == a_safe);
}

TEST_CASE("S-COLTS one-dimensional round lands on the pessimistic boundary") {
    // Coupled sphere noise of radius 0.5 in one dimension: eta = +-0.5.
    const Polytope dom = Polytope::box(1, 0.0, 1.0);
    const Vec alpha{{0.5}};
    const Vec a_safe = Vec::Zero(1);
    const PerturbationLaw law = PerturbationLaw::practical(1, 1);
    int saw_full = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        AgentState st = fresh_state(AlgorithmKind::SColts, 1, 1);
        const RoundContext ctx = manual_context(1, Vec{{1.0}}, Mat{{1.0}}, 1.0);
        Rng rng(seed);
        const StepOutcome out = scolts_step(st, ctx, law, rng, dom, alpha, a_safe, 1.0, 1e-12);
        REQUIRE(out.b.has_value());
        CHECK_FALSE(out.fallback);
        CHECK(out.action[0] == doctest::Approx(out.rho * (*out.b)[0]).epsilon(1e-12));
        CHECK(out.action[0] == doctest::Approx(0.25).epsilon(1e-9));
        if (std::abs((*out.b)[0] - 1.0) < 1e-9) {
            ++saw_full;
            CHECK(out.rho == doctest::Approx(0.25).epsilon(1e-9));
        }
    }
    CHECK(saw_full > 0);
}

TEST_CASE("resampling count") {
    CHECK(resample_count(4, 1, 0.1) == 1 + static_cast<int>(std::ceil(4.0 * std::log(20.0))));
    CHECK(resample_count(4, 1, 0.1) == 13);
    CHECK(resample_count(0, 12345, 0.1) == 1);
    CHECK(resample_count(1, 100, 0.1) >= resample_count(1, 10, 0.1));
    CHECK_THROWS_AS(resample_count(-1, 1, 0.1), std::invalid_argument);
}

TEST_CASE("best program selection") {
    const Polytope dom = Polytope::box(2, 0.0, 1.0);
    // -(a1 + a2) <= -3 has no solution in the unit square.
    std::vector<PerturbedParams> none{PerturbedParams{Vec{{1.0, 0.0}}, Mat{{-1.0, -1.0}}}};
    CHECK_FALSE(select_best_program(none, dom, Vec{{-3.0}}, 1e-9).has_value());

    std::vector<PerturbedParams> one{PerturbedParams{Vec{{1.0, 0.0}}, Mat{{-1.0, -1.0}}},
                                     PerturbedParams{Vec{{0.0, 1.0}}, Mat{{-2.0, -2.0}}}};
    // Only the second program admits a1 + a2 >= 1.5 inside the square.
    const auto w = select_best_program(one, dom, Vec{{-3.0}}, 1e-9);
    REQUIRE(w.has_value());
    CHECK(w->index == 1);
    CHECK(w->lp.value == doctest::Approx(1.0));

    std::vector<PerturbedParams> ties{PerturbedParams{Vec{{1.0, 0.0}}, Mat{{0.0, 0.0}}},
                                      PerturbedParams{Vec{{0.0, 1.0}}, Mat{{0.0, 0.0}}}};
    const auto tie = select_best_program(ties, dom, Vec{{1.0}}, 1e-9);
    REQUIRE(tie.has_value());
    CHECK(tie->index == 0);
}

TEST_CASE("a superset of draws never lowers the selected value") {
    std::mt19937_64 g(3);
    const Polytope dom = Polytope::box(3, -1.0, 1.0);
    const Vec alpha = Vec::Constant(2, 0.3);
    for (int k = 0; k < 30; ++k) {
        std::vector<PerturbedParams> draws;
        double prev = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < 8; ++i) {
            draws.push_back(PerturbedParams{oracle::gaussian_vec(g, 3), Mat::Random(2, 3)});
            const auto w = select_best_program(draws, dom, alpha, 1e-9);
            REQUIRE(w.has_value());
            CHECK(w->lp.value >= prev);
            prev = w->lp.value;
        }
    }
}

TEST_CASE("R-COLTS keeps the previous action when every draw is infeasible") {
    const Polytope dom = Polytope::box(1, 0.5, 1.0);
    AgentState st = fresh_state(AlgorithmKind::RColts, 1, 1);
    st.last_action = Vec{{0.7}};
    const RoundContext ctx = manual_context(1, Vec{{1.0}}, Mat{{1.0}}, 0.0);
    Rng rng(4);
    const StepOutcome out = rcolts_step(st, ctx, frozen_law(1, 1), rng, dom, Vec{{0.1}}, 5);
    CHECK(out.fallback);
    CHECK(out.action == Vec{{0.7}});
    CHECK(st.last_action == Vec{{0.7}});
    CHECK(out.samples == 5);
}

TEST_CASE("R-COLTS plays the feasible optimizer and remembers it") {
    const Polytope dom = Polytope::box(1, 0.0, 1.0);
    AgentState st = fresh_state(AlgorithmKind::RColts, 1, 1);
    const RoundContext ctx = manual_context(1, Vec{{1.0}}, Mat{{1.0}}, 0.0);
    Rng rng(5);
    const StepOutcome out = rcolts_step(st, ctx, frozen_law(1, 1), rng, dom, Vec{{0.4}}, 1);
    CHECK_FALSE(out.fallback);
    CHECK(out.action[0] == doctest::Approx(0.4));
    CHECK(st.last_action == out.action);
}

TEST_CASE("R-COLTS starts from a point of the domain") {
    const SlbInstance inst = builtin_polygon_instance(6);
    AgentConfig cfg;
    cfg.kind = AlgorithmKind::RColts;
    cfg.law = PerturbationLaw::practical(2, 6);
    const Agent agent(cfg, inst.domain(), inst.alpha(), std::nullopt);
    CHECK(inst.domain().contains(agent.state().last_action, 1e-9));
}

TEST_CASE("exploration round-robin on a small box") {
    const Polytope dom = Polytope::box(9, 0.0, 1.0 / 3.0);
    const std::vector<Vec> spanner = default_spanner(dom);
    REQUIRE(spanner.size() == 9);
    AgentState st = fresh_state(AlgorithmKind::EColts, 9, 1);
    for (Eigen::Index j = 0; j < 9; ++j) {
        const Vec e = exploration_policy(st, spanner);
        CHECK((e - Vec::Unit(9, j) / 3.0).norm() <= 1e-15);
    }
    CHECK((exploration_policy(st, spanner) - Vec::Unit(9, 0) / 3.0).norm() <= 1e-15);

    AgentState st2 = fresh_state(AlgorithmKind::EColts, 9, 1);
    Mat G = Mat::Zero(9, 9);
    for (int n = 1; n <= 9 * 7; ++n) {
        const Vec e = exploration_policy(st2, spanner);
        G += e * e.transpose();
        const double lmin = Eigen::SelfAdjointEigenSolver<Mat>(G).eigenvalues().minCoeff();
        CHECK(lmin >= (1.0 / 9.0) * std::floor(n / 9.0) - 1e-12);
    }
}

TEST_CASE("exploration set of a symmetric square") {
    const Polytope dom = Polytope::box(2, -0.5, 0.5);
    const std::vector<Vec> spanner = default_spanner(dom);
    REQUIRE(spanner.size() == 2);
    CHECK(std::abs(spanner[0].dot(spanner[1])) <= 1e-15);
    for (const Vec& e : spanner) CHECK(dom.contains(e, 0.0));
    CHECK_THROWS_AS(default_spanner(Polytope::box(2, 0.2, 0.5)), std::invalid_argument);
}

TEST_CASE("E-COLTS explores on the first round") {
    const SlbInstance inst = builtin_box_instance();
    AgentConfig cfg;
    cfg.kind = AlgorithmKind::EColts;
    cfg.law = PerturbationLaw::practical(9, 9);
    Agent agent(cfg, inst.domain(), inst.alpha(), std::nullopt);
    Rng rng(6);
    const StepOutcome out = agent.select(rng);
    CHECK(out.explored);
    CHECK(agent.state().u_explore == 1);
}

TEST_CASE("E-COLTS explores when the perturbed program is infeasible") {
    const Polytope dom = Polytope::box(1, 0.5, 1.0);
    AgentState st = fresh_state(AlgorithmKind::EColts, 1, 1);
    st.u_explore = 1000;
    const RoundContext ctx = manual_context(1, Vec{{1.0}}, Mat{{1.0}}, 1e-6);
    Rng rng(7);
    const std::vector<Vec> spanner{Vec{{0.5}}};
    const StepOutcome out = ecolts_step(st, ctx, frozen_law(1, 1), rng, dom, Vec{{0.1}}, spanner);
    CHECK(out.explored);
    CHECK(out.action == Vec{{0.5}});
    CHECK(st.u_explore == 1001);
}

TEST_CASE("E-COLTS plays the optimizer once exploration is paid for") {
    const Polytope dom = Polytope::box(1, 0.0, 1.0);
    AgentState st = fresh_state(AlgorithmKind::EColts, 1, 1);
    const RoundContext ctx = manual_context(1, Vec{{1.0}}, Mat{{1.0}}, 1.0);
    st.u_explore = static_cast<long>(std::ceil(exploration_threshold(ctx, 1))) + 1;
    Rng rng(8);
    const StepOutcome out = ecolts_step(st, ctx, frozen_law(1, 1), rng, dom, Vec{{0.6}}, {Vec{{1.0}}});
    CHECK_FALSE(out.explored);
    CHECK(out.action[0] == doctest::Approx(0.6));
}

TEST_CASE("E-COLTS exploration count respects its threshold") {
    const SlbInstance inst = builtin_box_instance();
    AgentConfig cfg;
    cfg.kind = AlgorithmKind::EColts;
    cfg.law = PerturbationLaw::practical(9, 9);
    Agent agent(cfg, inst.domain(), inst.alpha(), std::nullopt);
    long prev_u = 0, infeasible = 0;
    drive(agent, inst, 600, 9, [&](const StepOutcome& out, const Agent& a) {
        const double thr = exploration_threshold(a.context(), 9);
        if (out.explored && static_cast<double>(prev_u) > thr) ++infeasible;
        prev_u = a.state().u_explore;
        CHECK(static_cast<double>(prev_u) <= std::floor(thr) + 1.0 + static_cast<double>(infeasible));
    });
}

TEST_CASE("SAFE-LTS with zero radius reduces to the plain program") {
    const Polytope dom = Polytope::box(2, 0.0, 1.0);
    AgentState st = fresh_state(AlgorithmKind::SafeLts, 2, 1);
    const RoundContext ctx = manual_context(1, Vec{{1.0, 0.3}}, Mat{{1.0, 1.0}}, 0.0);
    Rng rng(9);
    const StepOutcome out = safelts_step(st, ctx, frozen_law(2, 1), rng, dom, Vec{{1.0}}, Vec::Zero(2));
    const LpResult lp = solve_lp(Vec{{1.0, 0.3}}, dom, Mat{{1.0, 1.0}}, Vec{{1.0}});
    CHECK((out.action - lp.x).norm() <= 1e-8);
}

TEST_CASE("SAFE-LTS one-dimensional cone") {
    const Polytope dom = Polytope::box(1, 0.0, 1.0);
    AgentState st = fresh_state(AlgorithmKind::SafeLts, 1, 1);
    const RoundContext ctx = manual_context(1, Vec{{1.0}}, Mat{{1.0}}, 1.0);
    Rng rng(10);
    const StepOutcome out = safelts_step(st, ctx, frozen_law(1, 1), rng, dom, Vec{{1.0}}, Vec::Zero(1));
    CHECK(out.action[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("SAFE-LTS actions satisfy the pessimistic constraints") {
    const SlbInstance inst = builtin_box_instance();
    AgentConfig cfg;
    cfg.kind = AlgorithmKind::SafeLts;
    cfg.law = PerturbationLaw::practical(9, 9);
    Agent agent(cfg, inst.domain(), inst.alpha(), inst.a_safe());
    drive(agent, inst, 60, 11, [&](const StepOutcome& out, const Agent& a) {
        CHECK(inst.domain().contains(out.action, 1e-9));
        const double v = pessimistic_violation(a.context().est.phi_hat, inst.alpha(), a.context().est.omega,
                                               a.state().stats.V_inv(), out.action);
        CHECK(v <= 1e-6);
    });
}

TEST_CASE("S-COLTS actions satisfy the pessimistic constraints") {
    const SlbInstance inst = builtin_polygon_instance(8);
    AgentConfig cfg;
    cfg.kind = AlgorithmKind::SColts;
    cfg.law = PerturbationLaw::practical(2, 8);
    Agent agent(cfg, inst.domain(), inst.alpha(), inst.a_safe());
    REQUIRE(agent.gamma0() == std::numeric_limits<double>::infinity());
    drive(agent, inst, 300, 12, [&](const StepOutcome& out, const Agent& a) {
        const double v = pessimistic_violation(a.context().est.phi_hat, inst.alpha(), a.context().est.omega,
                                               a.state().stats.V_inv(), out.action);
        CHECK(v <= 1e-8);
    });
}

TEST_CASE("S-COLTS margin warm-up") {
    const SlbInstance inst = builtin_box_instance(kDefaultBoxSeed, 0.0);
    AgentConfig cfg;
    cfg.kind = AlgorithmKind::SColts;
    cfg.law = PerturbationLaw::practical(9, 9);
    cfg.gamma0_mode = Gamma0Mode::Estimate;
    Agent agent(cfg, inst.domain(), inst.alpha(), inst.a_safe());
    CHECK_FALSE(agent.gamma0().has_value());
    long warm = 0;
    drive(agent, inst, 4000, 13, [&](const StepOutcome& out, const Agent&) {
        if (out.warmup) {
            ++warm;
            CHECK(out.action == *inst.a_safe());
        }
    });
    REQUIRE(agent.gamma0().has_value());
    const double margin = *optimal_action(inst).gamma_safe;
    CHECK(*agent.gamma0() >= margin / 2.0);
    CHECK(*agent.gamma0() <= margin);
    CHECK(warm == agent.state().gamma0->pulls());

    cfg.gamma0_mode = Gamma0Mode::Known;
    cfg.gamma0_known = 0.1;
    const Agent known(cfg, inst.domain(), inst.alpha(), inst.a_safe());
    CHECK(known.gamma0() == 0.1);
    cfg.gamma0_known = 0.0;
    CHECK_THROWS_AS(Agent(cfg, inst.domain(), inst.alpha(), inst.a_safe()), std::invalid_argument);
}

TEST_CASE("agent construction checks") {
    const SlbInstance inst = builtin_box_instance();
    AgentConfig cfg;
    cfg.kind = AlgorithmKind::SColts;
    cfg.law = PerturbationLaw::practical(9, 9);
    CHECK_THROWS_AS(Agent(cfg, inst.domain(), inst.alpha(), std::nullopt), std::invalid_argument);
    cfg.law = PerturbationLaw::practical(3, 9);
    CHECK_THROWS_AS(Agent(cfg, inst.domain(), inst.alpha(), inst.a_safe()), DimensionError);
    CHECK(parse_algorithm("r-colts") == AlgorithmKind::RColts);
    CHECK(algorithm_name(AlgorithmKind::SafeLts) == "safe-lts");
    CHECK_THROWS_AS(parse_algorithm("doss"), std::invalid_argument);
}
