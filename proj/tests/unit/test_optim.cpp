#include "colts/optim.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <doctest.h>

using namespace colts;

namespace {

const Mat kNoRows(0, 2);
const Vec kNoRhs(0);

using oracle::random_lp;
using oracle::RandomLp;

}  // namespace

TEST_CASE("LP over the unit square with a diagonal cut") {
    const LpResult r = solve_lp(Vec{{1.0, 0.0}}, Polytope::box(2, 0.0, 1.0), Mat{{1.0, 1.0}}, Vec{{1.0}});
    REQUIRE(r.optimal());
    CHECK(r.x[0] == doctest::Approx(1.0));
    CHECK(r.x[1] == doctest::Approx(0.0));
    CHECK(r.value == doctest::Approx(1.0));
}

TEST_CASE("LP with a row excluding the domain is infeasible") {
    const LpResult r = solve_lp(Vec{{1.0, 0.0}}, Polytope::box(2, 0.0, 1.0), Mat{{-1.0, 0.0}}, Vec{{-2.0}});
    CHECK_FALSE(r.optimal());
    CHECK(r.status == LpStatus::Infeasible);
}

TEST_CASE("LP over an unbounded domain raises") {
    Polytope open = Polytope::box(2, 0.0, 1.0);
    open.upper[1] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(solve_lp(Vec{{0.0, 1.0}}, open, kNoRows, kNoRhs), SolverError);
}

TEST_CASE("LP handles domains given by general rows and free coordinates") {
    // Triangle x >= 0, y >= 0, x + y <= 1 written entirely as rows.
    const double inf = std::numeric_limits<double>::infinity();
    Polytope tri{Mat{{-1.0, 0.0}, {0.0, -1.0}, {1.0, 1.0}}, Vec{{0.0, 0.0, 1.0}}, Vec::Constant(2, -inf),
                 Vec::Constant(2, inf)};
    const LpResult r = solve_lp(Vec{{1.0, 2.0}}, tri, kNoRows, kNoRhs);
    REQUIRE(r.optimal());
    CHECK(r.value == doctest::Approx(2.0));
    CHECK(r.x[1] == doctest::Approx(1.0));
    Polytope flipped = Polytope::box(2, -inf, 0.5);
    flipped.G = Mat{{-1.0, -1.0}};
    flipped.h = Vec{{1.0}};
    const LpResult s = solve_lp(Vec{{-1.0, 0.0}}, flipped, kNoRows, kNoRhs);
    REQUIRE(s.optimal());
    CHECK(s.value == doctest::Approx(1.5));
}

TEST_CASE("LP matches vertex enumeration on random small polytopes") {
    std::mt19937_64 rng(2024);
    int feasible = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index d = 1 + trial % 3;
        const RandomLp p = random_lp(rng, d);
        const LpResult r = solve_lp(p.c, p.dom, p.extra, p.rhs);
        const auto ref = oracle::vertex_enumeration(p.c, p.dom, p.extra, p.rhs, 1e-9);
        REQUIRE(r.optimal() == ref.has_value());
        if (!ref) continue;
        ++feasible;
        CHECK(std::abs(r.value - *ref) <= 1e-7);
        CHECK(p.dom.max_violation(r.x) <= 1e-8);
        if (p.extra.rows() > 0) CHECK((p.extra * r.x - p.rhs).maxCoeff() <= 1e-8);
    }
    CHECK(feasible > 100);
}

TEST_CASE("LP value is invariant under row permutation and objective scaling") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const RandomLp p = random_lp(rng, 3);
        const LpResult r = solve_lp(p.c, p.dom, p.extra, p.rhs);
        std::vector<Eigen::Index> perm(static_cast<size_t>(p.extra.rows()));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Mat pe(p.extra.rows(), 3);
        Vec pr(p.extra.rows());
        for (size_t i = 0; i < perm.size(); ++i) {
            pe.row(static_cast<Eigen::Index>(i)) = p.extra.row(perm[i]);
            pr[static_cast<Eigen::Index>(i)] = p.rhs[perm[i]];
        }
        const LpResult q = solve_lp(p.c, p.dom, pe, pr);
        const LpResult s = solve_lp(3.5 * p.c, p.dom, p.extra, p.rhs);
        REQUIRE(q.optimal() == r.optimal());
        REQUIRE(s.optimal() == r.optimal());
        if (!r.optimal()) continue;
        CHECK(std::abs(q.value - r.value) <= 1e-9);
        CHECK(std::abs(s.value - 3.5 * r.value) <= 3.5e-9);
    }
}

TEST_CASE("LP is deterministic") {
    std::mt19937_64 rng(5);
    const RandomLp p = random_lp(rng, 3);
    const LpResult a = solve_lp(p.c, p.dom, p.extra, p.rhs);
    const LpResult b = solve_lp(p.c, p.dom, p.extra, p.rhs);
    CHECK(a.status == b.status);
    if (a.optimal()) CHECK(a.x == b.x);
}

TEST_CASE("round tolerance") {
    CHECK(round_tolerance(1) == 1e-6);
    CHECK(round_tolerance(2'000'000) == doctest::Approx(5e-7));
}

TEST_CASE("scaling search returns one when the optimizer is already safe") {
    const Mat phi{{1.0}};
    const double rho =
        max_scaling_rho(phi, Vec{{0.5}}, 0.1, SymMatrix::identity(1), Vec{{0.0}}, Vec{{0.2}}, 1e-10);
    CHECK(rho == 1.0);
}

TEST_CASE("scaling search on the scalar toy") {
    // g(rho) = rho - 0.5 + rho = 2 rho - 0.5.
    const double rho = max_scaling_rho(Mat{{1.0}}, Vec{{0.5}}, 1.0, SymMatrix::identity(1), Vec{{0.0}},
                                       Vec{{1.0}}, 1e-12);
    CHECK(rho == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(rho <= 0.25);
}

TEST_CASE("scaling search rejects an unsafe anchor") {
    CHECK_THROWS_AS(max_scaling_rho(Mat{{1.0}}, Vec{{0.5}}, 1.0, SymMatrix::identity(1), Vec{{1.0}}, Vec{{0.0}},
                                    1e-9),
                    PreconditionError);
}

TEST_CASE("scaling search stops at the boundary and shrinks with more pessimism") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    const double tol = 1e-9;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index d = 3, m = 4;
        Mat phi(m, d);
        for (Eigen::Index i = 0; i < m; ++i) phi.row(i) = oracle::gaussian_vec(rng, d).normalized().transpose();
        const Vec alpha = Vec::Constant(m, u(rng));
        const SymMatrix Vinv = inv_and_inv_sqrt(SymMatrix(oracle::random_pd(rng, d, 2.0))).inv;
        const double omega = u(rng);
        const Vec b = 2.0 * oracle::gaussian_vec(rng, d);
        const Vec a0 = Vec::Zero(d);
        const double rho = max_scaling_rho(phi, alpha, omega, Vinv, a0, b, tol);
        CHECK(rho >= 0.0);
        CHECK(rho <= 1.0);
        CHECK(pessimistic_violation(phi, alpha, omega, Vinv, rho * b) <= 1e-8);
        if (rho < 1.0) CHECK(pessimistic_violation(phi, alpha, omega, Vinv, std::min(1.0, rho + 10 * tol) * b) > 0.0);
        const double rho_more = max_scaling_rho(phi, alpha, 1.5 * omega, Vinv, a0, b, tol);
        CHECK(rho_more <= rho + tol);
    }
}

TEST_CASE("cone program on the scalar toy") {
    const SocResult r = solve_soc(Vec{{1.0}}, Polytope::box(1, 0.0, 1.0), Mat{{1.0}}, Vec{{1.0}}, 1.0,
                                  SymMatrix::identity(1), 1e-9, Vec{{0.0}});
    REQUIRE(r.lp.optimal());
    CHECK(r.lp.x[0] == doctest::Approx(0.5).epsilon(1e-8));
    CHECK_FALSE(r.degraded);
}

TEST_CASE("cone program with zero radius is the plain LP") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const RandomLp p = random_lp(rng, 2);
        const SocResult s = solve_soc(p.c, p.dom, p.extra, p.rhs, 0.0, SymMatrix::identity(2), 1e-9, Vec::Zero(2));
        const LpResult l = solve_lp(p.c, p.dom, p.extra, p.rhs, 1e-9);
        REQUIRE(s.lp.optimal() == l.optimal());
        if (l.optimal()) {
            CHECK(s.lp.value == l.value);
            CHECK(s.lp.x == l.x);
        }
        CHECK(s.cut_rounds == 0);
    }
}

TEST_CASE("cone program matches a grid search in two dimensions") {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> u(0.05, 0.6);
    const Polytope box = Polytope::box(2, -0.5, 0.5);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index m = 3;
        Mat phi(m, 2);
        for (Eigen::Index i = 0; i < m; ++i) phi.row(i) = oracle::gaussian_vec(rng, 2).normalized().transpose();
        const Vec alpha = Vec::Constant(m, u(rng));
        const InverseRoots roots = inv_and_inv_sqrt(SymMatrix(oracle::random_pd(rng, 2, 1.0)));
        const double omega = u(rng);
        const Vec c = oracle::gaussian_vec(rng, 2);
        const SocResult s = solve_soc(c, box, phi, alpha, omega, roots.inv_sqrt, 1e-9, Vec::Zero(2));
        const auto ref = oracle::soc_grid_search(c, box, phi, alpha, omega, roots.inv_sqrt.matrix(), 2e-3);
        REQUIRE(s.lp.optimal());
        REQUIRE(ref.has_value());
        CHECK(std::abs(s.lp.value - *ref) <= 5e-3);
        CHECK(pessimistic_violation(phi, alpha, omega, roots.inv, s.lp.x) <= 1e-6);
    }
}

TEST_CASE("cone program falls back toward the anchor when the cut cap is reached") {
    std::mt19937_64 rng(12);
    const Polytope box = Polytope::box(2, -0.5, 0.5);
    const Mat phi{{1.0, 0.2}, {-0.3, 1.0}};
    const Vec alpha{{0.3, 0.3}};
    const InverseRoots roots = inv_and_inv_sqrt(SymMatrix(oracle::random_pd(rng, 2, 1.0)));
    const SocResult s = solve_soc(Vec{{1.0, 1.0}}, box, phi, alpha, 0.8, roots.inv_sqrt, 1e-12, Vec::Zero(2), 0);
    REQUIRE(s.lp.optimal());
    CHECK(s.degraded);
    CHECK(s.cut_rounds == 0);
    CHECK(s.lp.x.norm() > 0.0);
    CHECK(pessimistic_violation(phi, alpha, 0.8, roots.inv, s.lp.x) <= 1e-9);
}

TEST_CASE("cone program reports an infeasible relaxation") {
    const SocResult s = solve_soc(Vec{{1.0}}, Polytope::box(1, 0.0, 1.0), Mat{{-1.0}}, Vec{{-2.0}}, 1.0,
                                  SymMatrix::identity(1), 1e-9, Vec{{0.0}});
    CHECK_FALSE(s.lp.optimal());
}

TEST_CASE("supporting cuts never remove cone-feasible points") {
    // A cut at x with u = W x / ||W x|| reads phi a + omega u^T W a <= alpha.
    // Cauchy-Schwarz gives u^T W a <= ||W a||, so cone-feasible points satisfy it.
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    const Mat phi{{0.6, 0.8}};
    const Vec alpha{{0.4}};
    const double omega = 0.7;
    const Mat W = inv_and_inv_sqrt(SymMatrix(oracle::random_pd(rng, 2, 1.0))).inv_sqrt.matrix();
    int checked = 0;
    for (int it = 0; it < 200; ++it) {
        const Vec x{{u(rng), u(rng)}};
        const Vec wx = W * x;
        const Eigen::RowVectorXd cut = phi.row(0) + omega * (wx.normalized()).transpose() * W;
        for (int k = 0; k < 50; ++k) {
            const Vec a{{u(rng), u(rng)}};
            if (phi.row(0).dot(a) + omega * (W * a).norm() > alpha[0]) continue;
            ++checked;
            CHECK(cut.dot(a) <= alpha[0] + 1e-12);
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("polytope helpers") {
    const Polytope box = Polytope::box(2, 0.0, 1.0);
    CHECK(box.contains(Vec{{0.5, 1.0}}, 0.0));
    CHECK_FALSE(box.contains(Vec{{0.5, 1.1}}, 1e-6));
    CHECK(box.max_violation(Vec{{-0.25, 0.5}}) == doctest::Approx(0.25));
}
