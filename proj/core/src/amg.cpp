#include "mmd/linalg.hpp"

#include <algorithm>
#include <numeric>

namespace mmd {

namespace {

Eigen::VectorXd diagonal_of(const SparseMatrix& A) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(A.rows());
    for (int i = 0; i < A.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(A, i); it; ++it)
            if (it.col() == i) d[i] = it.value();
    return d;
}

/// Greedy strength-based aggregation. Returns aggregate id per vertex.
std::vector<int> aggregate(const SparseMatrix& A, double strength, int& n_aggregates) {
    const int n = static_cast<int>(A.rows());
    std::vector<int> agg(n, -1);

    // strong neighbors: |a_ij| >= strength * max_k |a_ik| over off-diagonals
    std::vector<std::vector<int>> strong(n);
    for (int i = 0; i < n; ++i) {
        double amax = 0.0;
        for (SparseMatrix::InnerIterator it(A, i); it; ++it)
            if (it.col() != i) amax = std::max(amax, std::abs(it.value()));
        for (SparseMatrix::InnerIterator it(A, i); it; ++it)
            if (it.col() != i && std::abs(it.value()) >= strength * amax)
                strong[i].push_back(static_cast<int>(it.col()));
    }

    n_aggregates = 0;
    // pass 1: seed aggregates from untouched vertices with untouched neighbors
    for (int i = 0; i < n; ++i) {
        if (agg[i] != -1) continue;
        bool free_nbrs = true;
        for (int j : strong[i])
            if (agg[j] != -1) { free_nbrs = false; break; }
        if (!free_nbrs) continue;
        const int id = n_aggregates++;
        agg[i] = id;
        for (int j : strong[i]) agg[j] = id;
    }
    // pass 2: attach leftovers to the strongest aggregated neighbor
    for (int i = 0; i < n; ++i) {
        if (agg[i] != -1) continue;
        double best = -1.0;
        int pick = -1;
        for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
            const int j = static_cast<int>(it.col());
            if (j == i || agg[j] == -1) continue;
            if (std::abs(it.value()) > best) {
                best = std::abs(it.value());
                pick = agg[j];
            }
        }
        if (pick != -1) agg[i] = pick;
    }
    // pass 3: stragglers become singletons
    for (int i = 0; i < n; ++i)
        if (agg[i] == -1) agg[i] = n_aggregates++;
    return agg;
}

} // namespace

AmgPreconditioner::AmgPreconditioner(const SparseOperator& A, Options opts) : omega_(opts.jacobi_omega) {
    if (!A.m_matrix)
        throw ConfigError("AmgPreconditioner: operator must be M-matrix tagged");

    SparseMatrix current = A.matrix;
    for (int level = 0; level < opts.max_levels; ++level) {
        Level lv;
        lv.A = current;
        Eigen::VectorXd d = diagonal_of(current);
        lv.inv_diag = d.unaryExpr([](double v) { return v != 0.0 ? 1.0 / v : 0.0; });

        const int n = static_cast<int>(current.rows());
        if (n <= opts.max_coarse) {
            levels_.push_back(std::move(lv));
            break;
        }

        int n_agg = 0;
        const std::vector<int> agg = aggregate(current, opts.strength, n_agg);
        if (n_agg >= n) {
            // no coarsening possible; stop and let Jacobi handle this level
            levels_.push_back(std::move(lv));
            break;
        }

        // tentative piecewise-constant prolongator, then one Jacobi smoothing
        // step so the V-cycle scales with the mesh size
        SparseMatrix P_tent(n, n_agg);
        {
            std::vector<Triplet> trips;
            trips.reserve(n);
            for (int i = 0; i < n; ++i) trips.emplace_back(i, agg[i], 1.0);
            P_tent.setFromTriplets(trips.begin(), trips.end());
        }
        SparseMatrix DinvA = lv.inv_diag.asDiagonal() * current;
        SparseMatrix P = P_tent - omega_ * (DinvA * P_tent);
        lv.P = P;
        SparseMatrix Pt = SparseMatrix(P.transpose());
        SparseMatrix next = Pt * current * P;
        next.makeCompressed();

        levels_.push_back(std::move(lv));
        current = next;
    }

    const Eigen::MatrixXd coarse(levels_.back().A);
    coarse_pinv_ = coarse.completeOrthogonalDecomposition().pseudoInverse();
}

void AmgPreconditioner::cycle(int level, const Eigen::VectorXd& r, Eigen::VectorXd& x) const {
    const Level& lv = levels_[level];
    if (level == static_cast<int>(levels_.size()) - 1) {
        x = coarse_pinv_ * r;
        return;
    }
    // pre-smooth (damped Jacobi from zero)
    x = omega_ * lv.inv_diag.cwiseProduct(r);
    Eigen::VectorXd residual = r - lv.A * x;
    // coarse correction
    Eigen::VectorXd rc = lv.P.transpose() * residual;
    Eigen::VectorXd xc;
    cycle(level + 1, rc, xc);
    x += lv.P * xc;
    // post-smooth
    residual = r - lv.A * x;
    x += omega_ * lv.inv_diag.cwiseProduct(residual);
}

Eigen::VectorXd AmgPreconditioner::apply(const Eigen::VectorXd& r) const {
    Eigen::VectorXd x;
    cycle(0, r, x);
    return x;
}

Preconditioner AmgPreconditioner::as_preconditioner() const {
    return [this](const Eigen::VectorXd& r) { return apply(r); };
}

} // namespace mmd
