#include "mmd/linalg.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>

namespace mmd {

namespace {
double elapsed_seconds(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}
} // namespace

SparseOperator SparseOperator::from_triplets(int n, const std::vector<Triplet>& triplets,
                                             bool symmetric, bool laplacian, bool m_matrix) {
    SparseOperator op;
    op.matrix.resize(n, n);
    op.matrix.setFromTriplets(triplets.begin(), triplets.end());
    op.matrix.makeCompressed();
    op.symmetric = symmetric;
    op.graph_laplacian = laplacian;
    op.m_matrix = m_matrix;
    return op;
}

double SparseOperator::max_row_sum() const {
    double worst = 0.0;
    for (int i = 0; i < matrix.outerSize(); ++i) {
        double sum = 0.0;
        for (SparseMatrix::InnerIterator it(matrix, i); it; ++it) sum += it.value();
        worst = std::max(worst, std::abs(sum));
    }
    return worst;
}

double SparseOperator::max_positive_offdiagonal() const {
    double worst = 0.0;
    for (int i = 0; i < matrix.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(matrix, i); it; ++it)
            if (it.col() != i) worst = std::max(worst, it.value());
    return worst;
}

Preconditioner identity_preconditioner() {
    return [](const Eigen::VectorXd& r) { return r; };
}

Preconditioner jacobi_preconditioner(const SparseMatrix& A) {
    Eigen::VectorXd inv_diag(A.rows());
    for (int i = 0; i < A.outerSize(); ++i) {
        double d = 0.0;
        for (SparseMatrix::InnerIterator it(A, i); it; ++it)
            if (it.col() == i) d = it.value();
        inv_diag[i] = (d != 0.0) ? 1.0 / d : 1.0;
    }
    return [inv_diag](const Eigen::VectorXd& r) { return inv_diag.cwiseProduct(r).eval(); };
}

std::pair<Eigen::VectorXd, SolveReport> pcg(const SparseOperator& A,
                                            const Eigen::VectorXd& b,
                                            const Preconditioner& M,
                                            const PcgOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    const int n = static_cast<int>(b.size());
    SolveReport report;

    Eigen::VectorXd rhs = b;
    const auto deflate = [n](Eigen::VectorXd& v) { v.array() -= v.mean(); (void)n; };
    if (opts.deflate_constant) {
        const double imbalance = std::abs(b.sum());
        const double scale = std::max(b.cwiseAbs().sum(), 1e-300);
        if (imbalance > 1e-10 * scale)
            throw SolverError("pcg: right-hand side violates the compatibility condition 1^T b = 0");
        deflate(rhs);
    }

    const double bnorm = rhs.norm();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (bnorm == 0.0) {
        report.converged = true;
        report.seconds = elapsed_seconds(start);
        return {x, report};
    }

    Eigen::VectorXd r = rhs;
    Eigen::VectorXd z = M(r);
    if (opts.deflate_constant) deflate(z);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);

    for (int it = 0; it < opts.max_iterations; ++it) {
        Eigen::VectorXd Ap = A.matrix * p;
        const double pAp = p.dot(Ap);
        if (pAp <= 0.0) break; // lost positive definiteness; report failure
        const double alpha = rz / pAp;
        x += alpha * p;
        r -= alpha * Ap;
        report.iterations = it + 1;
        report.relative_residual = r.norm() / bnorm;
        if (report.relative_residual <= opts.tol) {
            report.converged = true;
            break;
        }
        z = M(r);
        if (opts.deflate_constant) deflate(z);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    if (opts.deflate_constant) deflate(x);
    report.seconds = elapsed_seconds(start);
    return {x, report};
}

std::pair<Eigen::VectorXd, SolveReport> bicgstab(const SparseMatrix& A,
                                                 const Eigen::VectorXd& b,
                                                 const Preconditioner& M,
                                                 const BicgstabOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    SolveReport report;
    const int n = static_cast<int>(b.size());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        report.converged = true;
        report.seconds = elapsed_seconds(start);
        return {x, report};
    }

    Eigen::VectorXd r = b;
    Eigen::VectorXd r0 = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);

    for (int it = 0; it < opts.max_iterations; ++it) {
        const double rho_next = r0.dot(r);
        if (std::abs(rho_next) < 1e-300) break; // breakdown
        if (it == 0) {
            p = r;
        } else {
            const double beta = (rho_next / rho) * (alpha / omega);
            p = r + beta * (p - omega * v);
        }
        rho = rho_next;
        Eigen::VectorXd y = M(p);
        v = A * y;
        const double r0v = r0.dot(v);
        if (std::abs(r0v) < 1e-300) break;
        alpha = rho / r0v;
        Eigen::VectorXd s = r - alpha * v;
        if (s.norm() / bnorm <= opts.tol) {
            x += alpha * y;
            report.iterations = it + 1;
            report.relative_residual = s.norm() / bnorm;
            report.converged = true;
            break;
        }
        Eigen::VectorXd z = M(s);
        Eigen::VectorXd t = A * z;
        const double tt = t.dot(t);
        if (tt < 1e-300) break;
        omega = t.dot(s) / tt;
        if (std::abs(omega) < 1e-300) break;
        x += alpha * y + omega * z;
        r = s - omega * t;
        report.iterations = it + 1;
        report.relative_residual = r.norm() / bnorm;
        if (report.relative_residual <= opts.tol) {
            report.converged = true;
            break;
        }
    }
    if (!report.converged && report.iterations > 0) {
        // final residual from the last iterate, for honest n.c. reporting
        report.relative_residual = (b - A * x).norm() / bnorm;
    }
    report.seconds = elapsed_seconds(start);
    return {x, report};
}

std::tuple<Eigen::VectorXd, double, SolveReport> bordered_solve(const SparseOperator& A,
                                                                const Eigen::VectorXd& b,
                                                                const Eigen::VectorXd& w,
                                                                const BorderedOptions& opts) {
    const int n = A.rows();
    if (w.size() != n || b.size() != n)
        throw InternalError("bordered_solve: dimension mismatch");
    if (A.graph_laplacian) {
        // constant nullspace: w must have a nonzero mean component
        if (std::abs(w.sum()) <= 1e-12 * w.cwiseAbs().sum())
            throw SolverError("bordered_solve: constraint weights are orthogonal to the nullspace");
    }

    SolveReport report;
    const auto start = std::chrono::steady_clock::now();

    if (n <= opts.dense_limit) {
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + 1, n + 1);
        K.topLeftCorner(n, n) = Eigen::MatrixXd(A.matrix);
        K.topRightCorner(n, 1) = w;
        K.bottomLeftCorner(1, n) = w.transpose();
        Eigen::VectorXd rhs(n + 1);
        rhs.head(n) = b;
        rhs[n] = 0.0;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
        Eigen::VectorXd sol = lu.solve(rhs);
        const double rel = (K * sol - rhs).norm() / std::max(rhs.norm(), 1e-300);
        if (!(rel < 1e-8))
            throw SolverError("bordered_solve: singular bordered system");
        report.iterations = 1;
        report.relative_residual = rel;
        report.converged = true;
        report.seconds = elapsed_seconds(start);
        return {sol.head(n), sol[n], report};
    }

    // Matrix-free BiCGStab on the (n+1) saddle system with Jacobi scaling.
    Eigen::VectorXd inv_diag(n + 1);
    for (int i = 0; i < A.matrix.outerSize(); ++i) {
        double d = 0.0;
        for (SparseMatrix::InnerIterator it(A.matrix, i); it; ++it)
            if (it.col() == i) d = it.value();
        inv_diag[i] = (d != 0.0) ? 1.0 / d : 1.0;
    }
    inv_diag[n] = 1.0;

    // Inline BiCGStab with the augmented operator.
    const auto apply = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd out(n + 1);
        out.head(n) = A.matrix * v.head(n) + v[n] * w;
        out[n] = w.dot(v.head(n));
        return out;
    };
    Eigen::VectorXd rhs(n + 1);
    rhs.head(n) = b;
    rhs[n] = 0.0;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n + 1);
    const double bnorm = rhs.norm();
    Eigen::VectorXd r = rhs, r0 = rhs;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n + 1), p = Eigen::VectorXd::Zero(n + 1);
    for (int it = 0; it < opts.max_iterations; ++it) {
        const double rho_next = r0.dot(r);
        if (std::abs(rho_next) < 1e-300) break;
        if (it == 0) {
            p = r;
        } else {
            const double beta = (rho_next / rho) * (alpha / omega);
            p = r + beta * (p - omega * v);
        }
        rho = rho_next;
        Eigen::VectorXd y = inv_diag.cwiseProduct(p);
        v = apply(y);
        const double r0v = r0.dot(v);
        if (std::abs(r0v) < 1e-300) break;
        alpha = rho / r0v;
        Eigen::VectorXd s = r - alpha * v;
        Eigen::VectorXd z = inv_diag.cwiseProduct(s);
        Eigen::VectorXd t = apply(z);
        const double tt = t.dot(t);
        if (tt < 1e-300) {
            x += alpha * y;
            report.relative_residual = s.norm() / bnorm;
            report.converged = report.relative_residual <= opts.tol;
            report.iterations = it + 1;
            break;
        }
        omega = t.dot(s) / tt;
        x += alpha * y + omega * z;
        r = s - omega * t;
        report.iterations = it + 1;
        report.relative_residual = r.norm() / bnorm;
        if (report.relative_residual <= opts.tol) {
            report.converged = true;
            break;
        }
    }
    report.seconds = elapsed_seconds(start);
    return {x.head(n), x[n], report};
}

Eigen::VectorXd dense_qr_least_squares(const Eigen::MatrixXd& M, const Eigen::VectorXd& rhs,
                                       double pivot_tol) {
    const auto solve_op = qr_solve_operator(M, pivot_tol);
    if (!solve_op)
        throw SolverError("dense_qr_least_squares: rank-deficient system (unisolvency failure)");
    return (*solve_op) * rhs;
}

std::optional<Eigen::MatrixXd> qr_solve_operator(const Eigen::MatrixXd& M, double pivot_tol) {
    const int n = static_cast<int>(M.rows());
    const int q = static_cast<int>(M.cols());
    if (n < q) return std::nullopt;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(q, q).template triangularView<Eigen::Upper>();
    const double r00 = std::abs(R(0, 0));
    if (r00 == 0.0) return std::nullopt;
    for (int k = 0; k < q; ++k)
        if (std::abs(R(k, k)) <= pivot_tol * r00) return std::nullopt;

    Eigen::MatrixXd Q1 = qr.householderQ() * Eigen::MatrixXd::Identity(n, q);
    Eigen::MatrixXd Rinv_Qt = R.triangularView<Eigen::Upper>().solve(Q1.transpose());
    return qr.colsPermutation() * Rinv_Qt; // q x n
}

} // namespace mmd
