#include "steerkit/linop.hpp"

#include <algorithm>
#include <cmath>

namespace steerkit::linop {

double max_abs(const Mat& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const Mat& h, double tol) {
    if (h.rows() != h.cols()) return false;
    const double scale = std::max(1.0, max_abs(h));
    return max_abs(Mat(h - h.adjoint())) <= tol * scale;
}

void require_hermitian(const Mat& h, const char* what) {
    if (!is_hermitian(h))
        throw ValidationError(std::string(what) + ": operator is not Hermitian");
}

Mat hermitize(const Mat& h) { return 0.5 * (h + h.adjoint()); }

EigResult eig_hermitian(const Mat& h) {
    require_hermitian(h, "eig_hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(h));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eig_hermitian: eigensolver failed to converge");
    const int d = static_cast<int>(h.rows());
    EigResult r;
    r.eigenvalues = es.eigenvalues().reverse();
    r.eigenvectors = Mat(d, d);
    for (int k = 0; k < d; ++k) r.eigenvectors.col(k) = es.eigenvectors().col(d - 1 - k);
    return r;
}

double min_eig(const Mat& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitize(h), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool is_psd(const Mat& h, double tol) {
    require_hermitian(h, "is_psd");
    const double scale = std::max(1.0, max_abs(h));
    return min_eig(h) >= -tol * scale;
}

Mat sqrt_psd(const Mat& p) {
    EigResult e = eig_hermitian(p);
    const double top = e.eigenvalues.size() ? std::max(0.0, e.eigenvalues(0)) : 0.0;
    const double clip = 1e-9 * std::max(1.0, top);
    RVec lam = e.eigenvalues;
    for (int i = 0; i < lam.size(); ++i) {
        if (lam(i) < -clip)
            throw ValidationError("sqrt_psd: operator is not PSD (eigenvalue " +
                                  std::to_string(lam(i)) + ")");
        lam(i) = std::sqrt(std::max(0.0, lam(i)));
    }
    return e.eigenvectors * lam.asDiagonal() * e.eigenvectors.adjoint();
}

Mat pinv_sqrt_on_range(const Mat& p, double rank_tol) {
    EigResult e = eig_hermitian(p);
    const double top = e.eigenvalues.size() ? std::max(0.0, e.eigenvalues(0)) : 0.0;
    const double clip = 1e-9 * std::max(1.0, top);
    const double cut = rank_tol * top;
    RVec lam = e.eigenvalues;
    for (int i = 0; i < lam.size(); ++i) {
        if (lam(i) < -clip)
            throw ValidationError("pinv_sqrt_on_range: operator is not PSD");
        lam(i) = (lam(i) > cut) ? 1.0 / std::sqrt(lam(i)) : 0.0;
    }
    return e.eigenvectors * lam.asDiagonal() * e.eigenvectors.adjoint();
}

int psd_rank(const Mat& p, double rank_tol) {
    EigResult e = eig_hermitian(p);
    const double top = e.eigenvalues.size() ? std::max(0.0, e.eigenvalues(0)) : 0.0;
    const double cut = rank_tol * top;
    int r = 0;
    for (int i = 0; i < e.eigenvalues.size(); ++i)
        if (e.eigenvalues(i) > cut) ++r;
    return r;
}

Mat partial_trace(const Mat& m, int d_a, int d_b, Subsystem keep) {
    if (m.rows() != m.cols() || m.rows() != static_cast<Eigen::Index>(d_a) * d_b)
        throw ValidationError("partial_trace: dimension mismatch");
    if (keep == Subsystem::B) {
        Mat out = Mat::Zero(d_b, d_b);
        for (int i = 0; i < d_a; ++i)
            out += m.block(i * d_b, i * d_b, d_b, d_b);
        return out;
    }
    Mat out = Mat::Zero(d_a, d_a);
    for (int i = 0; i < d_a; ++i)
        for (int j = 0; j < d_a; ++j)
            out(i, j) = m.block(i * d_b, j * d_b, d_b, d_b).trace();
    return out;
}

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace steerkit::linop
