#pragma once

#include <string>
#include <vector>

#include "steerkit/linop.hpp"

namespace steerkit::conic {

/// Dense semidefinite program over a product of PSD cones of real symmetric
/// matrices:
///
///   minimize    c' vec(X)
///   subject to  A vec(X) = b,   X_k >= 0 for every block k,
///
/// where vec stacks the scaled upper triangles (svec) of all blocks.
/// Complex Hermitian variables enter through the standard real embedding
/// (see embed_complex); blocks flagged `complex_embedded` are kept on the
/// embedding subspace by symmetry-averaging each iterate.
struct ConicProblem {
    std::vector<int> block_dims;
    std::vector<bool> complex_embedded;  // empty = all false
    RMat a;                              // m x n
    RVec b;                              // m
    RVec c;                              // n
    bool maximize = false;

    int total_vec_dim() const;
};

enum class SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
    NumericalFailure,
};

std::string to_string(SolveStatus s);

struct SolveSettings {
    double feas_tol = 1e-8;
    double gap_tol = 1e-8;
    int max_iter = 200;
};

struct ConicSolution {
    std::vector<RMat> x;  // primal blocks
    std::vector<RMat> s;  // dual slack blocks
    RVec y;               // dual multipliers, original row indexing
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    double gap = 0.0;              // tr(X S) / max(1, mean |objective|)
    double primal_residual = 0.0;  // ||A vec X - b||_inf / max(1, ||b||_inf)
    double dual_residual = 0.0;    // max-abs dual slack defect, relative
    SolveStatus status = SolveStatus::NumericalFailure;
    int iterations = 0;
};

/// svec length of a symmetric d x d block.
inline int svec_dim(int d) { return d * (d + 1) / 2; }

/// Scaled upper-triangle vectorization: diagonal as-is, off-diagonal * sqrt2,
/// so that svec(U) . svec(V) = <U, V>.
RVec svec(const RMat& m);
RMat smat(const RVec& v, int d);

/// [[Re H, -Im H], [Im H, Re H]] — real symmetric, eigenvalues of H doubled
/// in multiplicity. <E(G), E(H)> = 2 <G, H>.
RMat embed_complex(const Mat& h);
Mat unembed_complex(const RMat& e);

ConicSolution solve(const ConicProblem& p, const SolveSettings& settings = {});

/// Plain-text sparse-triplet dump (SDPA-like) for cross-checking against
/// external solvers.
std::string dump_sparse(const ConicProblem& p);

}  // namespace steerkit::conic
