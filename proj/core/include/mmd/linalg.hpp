#pragma once

#include "mmd/types.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace mmd {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

/// Compressed-sparse-row operator with structural tags used by solver
/// preconditions and invariant checks.
struct SparseOperator {
    SparseMatrix matrix;
    bool symmetric = false;
    bool graph_laplacian = false; // row sums vanish, constant nullspace
    bool m_matrix = false;        // nonpositive off-diagonals

    int rows() const { return static_cast<int>(matrix.rows()); }
    int cols() const { return static_cast<int>(matrix.cols()); }

    static SparseOperator from_triplets(int n, const std::vector<Triplet>& triplets,
                                        bool symmetric, bool laplacian, bool m_matrix);

    /// Largest |row sum| (zero for an exact graph Laplacian).
    double max_row_sum() const;
    /// Largest positive off-diagonal entry (zero for an exact M-matrix).
    double max_positive_offdiagonal() const;
};

struct SolveReport {
    int iterations = 0;
    double relative_residual = 0.0;
    double seconds = 0.0;
    bool converged = false;
};

/// Linear preconditioner interface: z = M(r).
using Preconditioner = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

Preconditioner identity_preconditioner();
Preconditioner jacobi_preconditioner(const SparseMatrix& A);

struct PcgOptions {
    double tol = 1e-10;
    int max_iterations = 2000;
    /// Deflate the constant vector: project rhs and iterates to zero mean
    /// (for singular graph Laplacians). Requires 1^T b = 0 within 1e-10
    /// relative; violation raises SolverError.
    bool deflate_constant = false;
};

/// Preconditioned conjugate gradients for symmetric positive (semi)definite
/// operators. The deflated solve returns the zero-mean representative.
std::pair<Eigen::VectorXd, SolveReport> pcg(const SparseOperator& A,
                                            const Eigen::VectorXd& b,
                                            const Preconditioner& M,
                                            const PcgOptions& opts);

/// Aggregation-based algebraic multigrid V-cycle preconditioner for
/// M-matrix graph Laplacians. One application is a fixed symmetric linear
/// operation, as conjugate gradients requires.
class AmgPreconditioner {
public:
    struct Options {
        double strength = 0.25;    // keep |a_ij| >= strength * max_k |a_ik|
        double jacobi_omega = 2.0 / 3.0;
        int max_coarse = 64;
        int max_levels = 20;
    };

    AmgPreconditioner(const SparseOperator& A, Options opts = {});

    Eigen::VectorXd apply(const Eigen::VectorXd& r) const;
    Preconditioner as_preconditioner() const;
    int levels() const { return static_cast<int>(levels_.size()); }

private:
    struct Level {
        SparseMatrix A;
        SparseMatrix P;             // prolongation to this level's fine grid
        Eigen::VectorXd inv_diag;
    };
    std::vector<Level> levels_;
    Eigen::MatrixXd coarse_pinv_;
    double omega_;

    void cycle(int level, const Eigen::VectorXd& r, Eigen::VectorXd& x) const;
};

struct BicgstabOptions {
    double tol = 1e-8;
    int max_iterations = 20000;
};

/// BiCGStab with an optional preconditioner; used for the nonsymmetric
/// finite-volume systems. Non-convergence is reported, not thrown.
std::pair<Eigen::VectorXd, SolveReport> bicgstab(const SparseMatrix& A,
                                                 const Eigen::VectorXd& b,
                                                 const Preconditioner& M,
                                                 const BicgstabOptions& opts);

/// Solve the bordered saddle system [[A, w], [w^T, 0]] [x; lambda] = [b; 0]
/// that pins the nullspace component of a singular operator by a weighted
/// zero-mean constraint. Dense factorization for n <= dense_limit, else
/// matrix-free BiCGStab on the augmented system.
struct BorderedOptions {
    double tol = 1e-10;
    int max_iterations = 40000;
    int dense_limit = 2000;
};

std::tuple<Eigen::VectorXd, double, SolveReport> bordered_solve(const SparseOperator& A,
                                                                const Eigen::VectorXd& b,
                                                                const Eigen::VectorXd& w,
                                                                const BorderedOptions& opts = {});

/// Least squares by column-pivoted Householder QR (never normal equations).
/// Throws SolverError carrying an unisolvency signal on rank deficiency.
Eigen::VectorXd dense_qr_least_squares(const Eigen::MatrixXd& M, const Eigen::VectorXd& rhs,
                                       double pivot_tol = 1e-10);

/// Full least-squares solve operator pinv(M) (q x n) via the same QR path;
/// returns std::nullopt when the pivot test detects rank deficiency.
std::optional<Eigen::MatrixXd> qr_solve_operator(const Eigen::MatrixXd& M,
                                                 double pivot_tol = 1e-10);

} // namespace mmd
