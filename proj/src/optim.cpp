#include "colts/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/core.h>

namespace colts {

double Polytope::max_violation(const Vec& a) const {
    if (a.size() != dim()) {
        throw DimensionError(fmt::format("Polytope: dim {} vs point {}", dim(), a.size()));
    }
    double worst = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < dim(); ++j) {
        if (std::isfinite(lower[j])) worst = std::max(worst, lower[j] - a[j]);
        if (std::isfinite(upper[j])) worst = std::max(worst, a[j] - upper[j]);
    }
    if (G.rows() > 0) worst = std::max(worst, (G * a - h).maxCoeff());
    return worst;
}

Polytope Polytope::box(Eigen::Index dim, double lo, double hi) {
    return Polytope{Mat(0, dim), Vec(0), Vec::Constant(dim, lo), Vec::Constant(dim, hi)};
}

namespace {

constexpr double kPivotEps = 1e-9;
constexpr long kPivotCap = 20000;
constexpr double kDriftTol = 1e-9;
constexpr double kRatioTol = 1e-12;

// max c^T y s.t. A y <= b, y >= 0, in the compressed-dictionary layout: rows
// 0..k-1 are constraints, row k the objective, row k+1 the phase-1 objective;
// column n is the phase-1 auxiliary variable, column n+1 the right-hand side.
class Tableau {
public:
    Tableau(const Mat& A, const Vec& b, const Vec& c)
        : A_(A), b_(b), k_(static_cast<int>(A.rows())), n_(static_cast<int>(A.cols())), w_(n_ + 2),
          D_(static_cast<size_t>((k_ + 2) * w_), 0.0), basis_(k_), nonbasis_(n_ + 1) {
        for (int i = 0; i < k_; ++i) {
            for (int j = 0; j < n_; ++j) at(i, j) = A(i, j);
            at(i, n_) = -1.0;
            at(i, n_ + 1) = b[i];
            basis_[i] = n_ + i;
        }
        for (int j = 0; j < n_; ++j) {
            nonbasis_[j] = j;
            at(k_, j) = -c[j];
        }
        nonbasis_[n_] = -1;
        at(k_ + 1, n_) = 1.0;
    }

    // Returns false on infeasibility; throws on unboundedness.
    bool solve(double feas_tol, Vec& y, double& value) {
        int r = 0;
        for (int i = 1; i < k_; ++i) {
            if (at(i, n_ + 1) < at(r, n_ + 1)) r = i;
        }
        if (k_ > 0 && at(r, n_ + 1) < -kPivotEps) {
            pivot(r, n_);
            if (!run(2) || at(k_ + 1, n_ + 1) < -feas_tol) return false;
            for (int i = 0; i < k_; ++i) {
                if (basis_[i] != -1) continue;
                int s = -1;
                for (int j = 0; j <= n_; ++j) {
                    if (nonbasis_[j] == -1) continue;
                    if (s == -1 || std::abs(at(i, j)) > std::abs(at(i, s))) s = j;
                }
                if (s != -1 && std::abs(at(i, s)) > kPivotEps) pivot(i, s);
            }
        }
        if (!run(1)) throw SolverError("solve_lp: program is unbounded; domain must be compact");
        y = Vec::Zero(n_);
        for (int i = 0; i < k_; ++i) {
            if (basis_[i] >= 0 && basis_[i] < n_) y[basis_[i]] = at(i, n_ + 1);
        }
        if (residual(y) > kDriftTol) refactor(y);
        value = at(k_, n_ + 1);
        return true;
    }

private:
    double residual(const Vec& y) const {
        double worst = y.size() > 0 ? std::max(0.0, -y.minCoeff()) : 0.0;
        if (k_ > 0) worst = std::max(worst, (A_ * y - b_).maxCoeff());
        return worst;
    }

    // Recomputes the basic solution from the original data when the updated
    // tableau has drifted.
    void refactor(Vec& y) const {
        Mat B = Mat::Zero(k_, k_);
        for (int i = 0; i < k_; ++i) {
            const int v = basis_[i];
            if (v >= n_) {
                B(v - n_, i) = 1.0;
            } else if (v >= 0) {
                B.col(i) = A_.col(v);
            } else {
                B.col(i).setConstant(-1.0);
            }
        }
        const Vec xb = B.fullPivLu().solve(b_);
        Vec fresh = Vec::Zero(n_);
        for (int i = 0; i < k_; ++i) {
            if (basis_[i] >= 0 && basis_[i] < n_) fresh[basis_[i]] = xb[i];
        }
        if (residual(fresh) < residual(y)) y = fresh;
    }

    double& at(int i, int j) { return D_[static_cast<size_t>(i * w_ + j)]; }

    void pivot(int r, int s) {
        double* pr = &at(r, 0);
        const double inv = 1.0 / pr[s];
        for (int i = 0; i < k_ + 2; ++i) {
            if (i == r) continue;
            double* pi = &at(i, 0);
            if (std::abs(pi[s]) <= kPivotEps) continue;
            const double f = pi[s] * inv;
            for (int j = 0; j < w_; ++j) pi[j] -= pr[j] * f;
            pi[s] = pr[s] * f;
        }
        for (int j = 0; j < w_; ++j) {
            if (j != s) pr[j] *= inv;
        }
        for (int i = 0; i < k_ + 2; ++i) {
            if (i != r) at(i, s) *= -inv;
        }
        pr[s] = inv;
        std::swap(basis_[r], nonbasis_[s]);
        if (++pivots_ > kPivotCap) throw SolverError("solve_lp: pivot cap exceeded");
    }

    // Bland's rule picks the entering column; among rows tied at the minimum
    // ratio the largest pivot element leaves, lowest label on exact ties.
    bool run(int phase) {
        const int x = k_ + phase - 1;
        for (;;) {
            int s = -1;
            for (int j = 0; j <= n_; ++j) {
                if (nonbasis_[j] == -phase) continue;
                if (at(x, j) < -kPivotEps && (s == -1 || nonbasis_[j] < nonbasis_[s])) s = j;
            }
            if (s == -1) return true;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < k_; ++i) {
                const double col = at(i, s);
                if (col > kPivotEps) best = std::min(best, at(i, n_ + 1) / col);
            }
            if (!std::isfinite(best)) return false;
            const double slack = kRatioTol * (1.0 + std::abs(best));
            int r = -1;
            for (int i = 0; i < k_; ++i) {
                const double col = at(i, s);
                if (col <= kPivotEps || at(i, n_ + 1) / col > best + slack) continue;
                if (r == -1 || col > at(r, s) || (col == at(r, s) && basis_[i] < basis_[r])) r = i;
            }
            pivot(r, s);
        }
    }

    Mat A_;
    Vec b_;
    int k_, n_, w_;
    std::vector<double> D_;
    std::vector<int> basis_, nonbasis_;
    long pivots_ = 0;
};

enum class VarKind { Shift, Flip, Split };

}  // namespace

LpResult solve_lp(const Vec& c, const Polytope& dom, const Mat& extra_lhs, const Vec& extra_rhs, double tol) {
    const Eigen::Index d = dom.dim();
    if (c.size() != d || dom.upper.size() != d || dom.G.cols() != d || dom.G.rows() != dom.h.size() ||
        (extra_lhs.rows() > 0 && extra_lhs.cols() != d) || extra_lhs.rows() != extra_rhs.size()) {
        throw DimensionError("solve_lp: inconsistent dimensions");
    }

    // x = offset + T y with y >= 0.
    std::vector<VarKind> kind(static_cast<size_t>(d));
    Vec offset = Vec::Zero(d);
    Eigen::Index n = 0;
    for (Eigen::Index j = 0; j < d; ++j) {
        if (std::isfinite(dom.lower[j])) {
            kind[j] = VarKind::Shift;
            offset[j] = dom.lower[j];
            n += 1;
        } else if (std::isfinite(dom.upper[j])) {
            kind[j] = VarKind::Flip;
            offset[j] = dom.upper[j];
            n += 1;
        } else {
            kind[j] = VarKind::Split;
            n += 2;
        }
    }
    Mat T = Mat::Zero(d, n);
    Eigen::Index col = 0;
    Eigen::Index n_upper = 0;
    for (Eigen::Index j = 0; j < d; ++j) {
        switch (kind[j]) {
        case VarKind::Shift:
            T(j, col++) = 1.0;
            if (std::isfinite(dom.upper[j])) ++n_upper;
            break;
        case VarKind::Flip:
            T(j, col++) = -1.0;
            break;
        case VarKind::Split:
            T(j, col++) = 1.0;
            T(j, col++) = -1.0;
            break;
        }
    }

    const Eigen::Index k = dom.G.rows() + extra_lhs.rows() + n_upper;
    Mat A(k, n);
    Vec b(k);
    Eigen::Index row = 0;
    if (dom.G.rows() > 0) {
        A.topRows(dom.G.rows()) = dom.G * T;
        b.head(dom.G.rows()) = dom.h - dom.G * offset;
        row += dom.G.rows();
    }
    if (extra_lhs.rows() > 0) {
        A.middleRows(row, extra_lhs.rows()) = extra_lhs * T;
        b.segment(row, extra_lhs.rows()) = extra_rhs - extra_lhs * offset;
        row += extra_lhs.rows();
    }
    col = 0;
    for (Eigen::Index j = 0; j < d; ++j) {
        if (kind[j] == VarKind::Shift && std::isfinite(dom.upper[j])) {
            A.row(row).setZero();
            A(row, col) = 1.0;
            b[row] = dom.upper[j] - dom.lower[j];
            ++row;
        }
        col += kind[j] == VarKind::Split ? 2 : 1;
    }

    Tableau tab(A, b, T.transpose() * c);
    Vec y;
    double value = 0.0;
    LpResult out;
    if (!tab.solve(tol, y, value)) {
        out.status = LpStatus::Infeasible;
        return out;
    }
    out.status = LpStatus::Optimal;
    out.x = offset + T * y;
    out.value = c.dot(out.x);
    return out;
}

double round_tolerance(long t) {
    return std::min(1e-6, 1.0 / static_cast<double>(std::max<long>(t, 1)));
}

double pessimistic_violation(const Mat& phi_hat, const Vec& alpha, double omega, const SymMatrix& V_inv,
                             const Vec& a) {
    return (phi_hat * a - alpha).maxCoeff() + omega * mahalanobis(a, V_inv);
}

namespace {

template <class G>
double bisect_feasible_end(G&& g, double tol) {
    if (g(1.0) <= 0.0) return 1.0;
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) <= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

}  // namespace

double max_scaling_rho(const Mat& phi_hat, const Vec& alpha, double omega, const SymMatrix& V_inv,
                       const Vec& a_safe, const Vec& b, double tol) {
    if (a_safe.size() != b.size() || phi_hat.cols() != b.size() || phi_hat.rows() != alpha.size()) {
        throw DimensionError("max_scaling_rho: inconsistent dimensions");
    }
    auto g = [&](double rho) {
        const Vec a = (1.0 - rho) * a_safe + rho * b;
        return pessimistic_violation(phi_hat, alpha, omega, V_inv, a);
    };
    const double g0 = g(0.0);
    if (g0 > tol) {
        throw PreconditionError(fmt::format("max_scaling_rho: anchor violates the pessimistic constraint by {}", g0));
    }
    return bisect_feasible_end(g, tol);
}

SocResult solve_soc(const Vec& c, const Polytope& dom, const Mat& phi_hat, const Vec& alpha, double omega,
                    const SymMatrix& V_inv_sqrt, double tol, const Vec& anchor, int cut_cap) {
    const Eigen::Index d = dom.dim();
    const Eigen::Index m = phi_hat.rows();
    if (phi_hat.cols() != d || alpha.size() != m || V_inv_sqrt.dim() != d || anchor.size() != d) {
        throw DimensionError("solve_soc: inconsistent dimensions");
    }
    const Mat& W = V_inv_sqrt.matrix();
    auto cone_violation = [&](const Vec& a) -> Vec {
        return (phi_hat * a - alpha).array() + omega * (W * a).norm();
    };

    // Rows phi_hat^i a <= alpha^i are the u = 0 member of the cut pool.
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    rows.reserve(static_cast<size_t>(m) * 4);
    for (Eigen::Index i = 0; i < m; ++i) {
        rows.emplace_back(phi_hat.row(i));
        rhs.push_back(alpha[i]);
    }

    SocResult out;
    for (;;) {
        Mat lhs(static_cast<Eigen::Index>(rows.size()), d);
        Vec b(static_cast<Eigen::Index>(rows.size()));
        for (size_t r = 0; r < rows.size(); ++r) {
            lhs.row(static_cast<Eigen::Index>(r)) = rows[r];
            b[static_cast<Eigen::Index>(r)] = rhs[r];
        }
        LpResult lp;
        bool stalled = false;
        try {
            lp = solve_lp(c, dom, lhs, b, tol);
        } catch (const SolverError&) {
            // Nearly parallel cuts can stall the pivoting; keep the last relaxation.
            if (out.cut_rounds == 0) throw;
            stalled = true;
        }
        if (!stalled) {
            out.lp = std::move(lp);
            if (!out.lp.optimal()) return out;
        }

        const Vec& x = out.lp.x;
        const Vec viol = cone_violation(x);
        if (omega == 0.0 || viol.maxCoeff() <= tol) return out;

        if (stalled || out.cut_rounds >= cut_cap) {
            out.degraded = true;
            const SymMatrix V_inv(W * W);
            const double rho = max_scaling_rho(phi_hat, alpha, omega, V_inv, anchor, x, tol);
            out.lp.x = (1.0 - rho) * anchor + rho * x;
            out.lp.value = c.dot(out.lp.x);
            return out;
        }

        const Vec wx = W * x;
        const double nrm = wx.norm();
        if (nrm == 0.0) return out;
        const Eigen::RowVectorXd shift = omega * (wx / nrm).transpose() * W;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (viol[i] > tol) {
                rows.emplace_back(phi_hat.row(i) + shift);
                rhs.push_back(alpha[i]);
            }
        }
        ++out.cut_rounds;
    }
}

}  // namespace colts
