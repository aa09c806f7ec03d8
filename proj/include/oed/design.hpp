#pragma once

#include "oed/grid.hpp"
#include "oed/sensitivity.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace oed {

/// Symmetric positive semidefinite m×m information matrix.
struct FisherInformation {
    Matrix matrix;
};

struct EigenPair {
    double value = 0.0;
    Vector vector;  ///< unit norm
};

/// All eigenvalues (ascending) and matching eigenvectors (columns) of a
/// symmetric matrix by cyclic Jacobi rotations. The input is symmetrized
/// first. Throws DidNotConverge if the sweep budget is exhausted.
struct SymmetricEigen {
    Vector values;
    Matrix vectors;
};
SymmetricEigen jacobi_eigen(const Matrix& a);

/// Smallest eigenvalue and a unit eigenvector of a symmetric matrix.
EigenPair min_eigenpair(const Matrix& a);

/// Information atom of time point i: M_i = B_iᵀ B_i for the q×m block B_i.
Matrix atomic_information(const SensitivityRecord& record, std::size_t i);

/// Σ_i lambda_i M_i.
FisherInformation fim_from_weights(const SensitivityRecord& record, const Vector& lambda);

/// Σ_i M_i, the information matrix of the full grid (SᵀS).
FisherInformation full_fim(const SensitivityRecord& record);

enum class DesignSolver {
    InteriorPoint,  ///< primal-dual interior point (default)
    FrankWolfe,  ///< conditional gradient with 2/(k+2) steps
};

struct DesignOptions {
    DesignSolver solver = DesignSolver::InteriorPoint;
    /// Target certified gap, measured on atoms normalized by max_i tr(M_i).
    double tol = 1e-9;
    /// Interior-point or Frank–Wolfe iterations.
    int max_iter = 50000;
};

/// E-optimal design weights over the grid points.
struct DesignWeights {
    Vector lambda;           ///< on the probability simplex
    double t_value = 0.0;    ///< λ_min(Σ λ_i M_i) in the record's units
    double gap = 0.0;        ///< certified suboptimality bound, normalized units
    double scale = 1.0;      ///< normalization max_i tr(M_i); raw gap = gap·scale
    int iterations = 0;
    bool converged = false;
    bool rank_deficient = false;  ///< full-grid information matrix numerically singular
    /// Frank–Wolfe only: best gap so far, recorded every 50 iterations.
    std::vector<double> gap_checkpoints;
};

/// Solves max_{λ ∈ simplex} λ_min(Σ λ_i M_i).
DesignWeights e_optimal_weights(const SensitivityRecord& record, const DesignOptions& options = {});

/// Rank per time point: 1 for the largest weight, ties share their mean position.
Vector rank_times(const Vector& lambda);

/// Indices of the n smallest ranks (ties broken by earlier index), in time order.
std::vector<std::size_t> select_top_n(const Vector& ranks, std::size_t n);

std::vector<double> times_of(const TimeGrid& grid, const std::vector<std::size_t>& indices);

/// CSV `t,lambda,rank`.
void write_design_csv(const TimeGrid& grid, const DesignWeights& weights, std::ostream& out);

/// Key-value diagnostics block (iterations, gap, t_value, ...).
std::string design_diagnostics(const DesignWeights& weights);

}  // namespace oed
