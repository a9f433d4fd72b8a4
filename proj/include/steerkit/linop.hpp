#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace steerkit {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Thrown when an input violates a structural precondition (shape,
/// Hermiticity, positivity, normalization).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

namespace linop {

inline Mat identity(int d) { return Mat::Identity(d, d); }

/// Max-abs-entry norm. All relative tolerances in this library are
/// expressed against this norm unless stated otherwise.
double max_abs(const Mat& m);

bool is_hermitian(const Mat& h, double tol = 1e-12);
void require_hermitian(const Mat& h, const char* what);

/// (H + H^dag)/2 — cheap cleanup for operators that are Hermitian up to
/// roundoff (e.g. solver output).
Mat hermitize(const Mat& h);

struct EigResult {
    RVec eigenvalues;  // descending
    Mat eigenvectors;  // columns, matching order
};

/// Eigendecomposition of a Hermitian operator, eigenvalues descending.
/// Throws ValidationError on non-Hermitian input.
EigResult eig_hermitian(const Mat& h);

double min_eig(const Mat& h);

/// PSD check relative to max(1, ||H||): lambda_min >= -tol * max(1, ||H||).
bool is_psd(const Mat& h, double tol = 1e-9);

/// PSD square root. Eigenvalues in [-1e-9*||P||, 0) are clipped to 0;
/// anything more negative is an error.
Mat sqrt_psd(const Mat& p);

/// P^{-1/2} restricted to the range of P: eigenvalues below
/// rank_tol * lambda_max are treated as exactly zero. Q satisfies
/// Q P Q = projector onto range(P). Returns the zero operator for P = 0.
Mat pinv_sqrt_on_range(const Mat& p, double rank_tol = 1e-9);

/// Rank of a PSD operator under the same thresholding rule.
int psd_rank(const Mat& p, double rank_tol = 1e-9);

enum class Subsystem { A, B };

/// Partial trace of an operator on C^{dA} (x) C^{dB}; `keep` names the
/// surviving subsystem. The A system is the left (slow) tensor index.
Mat partial_trace(const Mat& m, int d_a, int d_b, Subsystem keep);

Mat kron(const Mat& a, const Mat& b);

}  // namespace linop
}  // namespace steerkit
