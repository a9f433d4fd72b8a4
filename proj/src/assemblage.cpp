#include "steerkit/assemblage.hpp"

#include <cmath>

namespace steerkit {

void ValidationReport::add(std::string name, double residual, double tol) {
    bool ok = residual <= tol;
    checks.push_back({std::move(name), residual, tol, ok});
    passed = passed && ok;
}

namespace assemblage {

using linop::hermitize;
using linop::max_abs;
using linop::min_eig;

ValidationReport validate_povm(const Povm& p, double tol) {
    ValidationReport rep;
    Mat sum = Mat::Zero(p.dim, p.dim);
    for (size_t a = 0; a < p.elements.size(); ++a) {
        const Mat& m = p.elements[a];
        rep.add("element " + std::to_string(a) + " hermitian",
                max_abs(Mat(m - m.adjoint())), 1e-12 * std::max(1.0, max_abs(m)));
        rep.add("element " + std::to_string(a) + " psd", std::max(0.0, -min_eig(m)),
                tol * std::max(1.0, max_abs(m)));
        sum += m;
    }
    rep.add("sum to identity", max_abs(Mat(sum - linop::identity(p.dim))), 1e-9);
    return rep;
}

ValidationReport validate_ma(const MeasurementAssemblage& ma, double tol) {
    ValidationReport rep;
    if (ma.elements.size() != static_cast<size_t>(ma.n_settings) * ma.n_outcomes) {
        rep.add("element count", 1.0, 0.0);
        return rep;
    }
    for (int x = 0; x < ma.n_settings; ++x) {
        Mat sum = Mat::Zero(ma.dim, ma.dim);
        for (int a = 0; a < ma.n_outcomes; ++a) {
            const Mat& m = ma.at(a, x);
            rep.add("M(" + std::to_string(a) + "|" + std::to_string(x) + ") psd",
                    std::max(0.0, -min_eig(m)), tol * std::max(1.0, max_abs(m)));
            sum += m;
        }
        rep.add("setting " + std::to_string(x) + " sums to identity",
                max_abs(Mat(sum - linop::identity(ma.dim))), 1e-9);
    }
    return rep;
}

ValidationReport validate_sa(const StateAssemblage& sa, double tol) {
    ValidationReport rep;
    if (sa.elements.size() != static_cast<size_t>(sa.n_settings) * sa.n_outcomes) {
        rep.add("element count", 1.0, 0.0);
        return rep;
    }
    rep.add("reduced state trace 1", std::abs(sa.reduced_state.trace().real() - 1.0), 1e-10);
    rep.add("reduced state psd", std::max(0.0, -min_eig(sa.reduced_state)), tol);
    for (int x = 0; x < sa.n_settings; ++x) {
        Mat sum = Mat::Zero(sa.dim, sa.dim);
        for (int a = 0; a < sa.n_outcomes; ++a) {
            const Mat& s = sa.at(a, x);
            rep.add("sigma(" + std::to_string(a) + "|" + std::to_string(x) + ") psd",
                    std::max(0.0, -min_eig(s)), tol * std::max(1.0, max_abs(s)));
            sum += s;
        }
        rep.add("setting " + std::to_string(x) + " marginal", max_abs(Mat(sum - sa.reduced_state)),
                1e-8);
    }
    return rep;
}

StateAssemblage assemblage_from_state(const Mat& rho_ab, const MeasurementAssemblage& ma) {
    const int d_a = ma.dim;
    if (rho_ab.rows() % d_a != 0)
        throw ValidationError("assemblage_from_state: dimension mismatch");
    const int d_b = static_cast<int>(rho_ab.rows()) / d_a;
    if (static_cast<Eigen::Index>(d_a) * d_b != rho_ab.rows())
        throw ValidationError("assemblage_from_state: dimension mismatch");

    StateAssemblage sa;
    sa.dim = d_b;
    sa.n_settings = ma.n_settings;
    sa.n_outcomes = ma.n_outcomes;
    sa.elements.resize(ma.elements.size());
    for (int x = 0; x < ma.n_settings; ++x)
        for (int a = 0; a < ma.n_outcomes; ++a) {
            Mat op = linop::kron(ma.at(a, x), linop::identity(d_b));
            sa.at(a, x) = hermitize(linop::partial_trace(rho_ab * op, d_a, d_b,
                                                         linop::Subsystem::B));
        }
    sa.reduced_state = hermitize(linop::partial_trace(rho_ab, d_a, d_b, linop::Subsystem::B));
    return sa;
}

StateAssemblage pure_state_assemblage(const RVec& schmidt_coeffs,
                                      const MeasurementAssemblage& ma) {
    if (schmidt_coeffs.size() != ma.dim)
        throw ValidationError("pure_state_assemblage: coefficient count must match dim");
    double norm2 = 0.0;
    for (int i = 0; i < schmidt_coeffs.size(); ++i) {
        if (schmidt_coeffs(i) < 0)
            throw ValidationError("pure_state_assemblage: negative Schmidt coefficient");
        norm2 += schmidt_coeffs(i) * schmidt_coeffs(i);
    }
    if (std::abs(norm2 - 1.0) > 1e-9)
        throw ValidationError("pure_state_assemblage: squared coefficients must sum to 1");

    Mat sqrt_rho = Mat::Zero(ma.dim, ma.dim);
    Mat rho = Mat::Zero(ma.dim, ma.dim);
    for (int i = 0; i < ma.dim; ++i) {
        sqrt_rho(i, i) = schmidt_coeffs(i);
        rho(i, i) = schmidt_coeffs(i) * schmidt_coeffs(i);
    }

    StateAssemblage sa;
    sa.dim = ma.dim;
    sa.n_settings = ma.n_settings;
    sa.n_outcomes = ma.n_outcomes;
    sa.elements.resize(ma.elements.size());
    for (int x = 0; x < ma.n_settings; ++x)
        for (int a = 0; a < ma.n_outcomes; ++a)
            sa.at(a, x) = hermitize(Mat((sqrt_rho * ma.at(a, x) * sqrt_rho).transpose()));
    sa.reduced_state = rho;
    return sa;
}

namespace {

// Phase convention for range isometries: rotate each column so its
// largest-magnitude entry is real positive.
void fix_column_phases(Mat& v) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        Eigen::Index imax = 0;
        double best = -1.0;
        for (Eigen::Index r = 0; r < v.rows(); ++r) {
            double m = std::abs(v(r, c));
            if (m > best) {
                best = m;
                imax = r;
            }
        }
        Cplx z = v(imax, c);
        if (std::abs(z) > 0) v.col(c) *= std::conj(z) / std::abs(z);
    }
}

}  // namespace

SeoResult seo(const StateAssemblage& sa, double rank_tol) {
    linop::EigResult e = linop::eig_hermitian(sa.reduced_state);
    const double top = std::max(0.0, e.eigenvalues(0));
    const double cut = rank_tol * std::max(top, 1e-300);
    int rank = 0;
    while (rank < e.eigenvalues.size() && e.eigenvalues(rank) > cut) ++rank;

    SeoResult out;
    out.rank = rank;
    out.rho_b = sa.reduced_state;
    Mat v = e.eigenvectors.leftCols(rank);
    fix_column_phases(v);
    out.isometry = v;

    RVec inv_sqrt(rank);
    for (int i = 0; i < rank; ++i) inv_sqrt(i) = 1.0 / std::sqrt(e.eigenvalues(i));

    out.ma.dim = rank;
    out.ma.n_settings = sa.n_settings;
    out.ma.n_outcomes = sa.n_outcomes;
    out.ma.elements.resize(sa.elements.size());
    for (int x = 0; x < sa.n_settings; ++x)
        for (int a = 0; a < sa.n_outcomes; ++a) {
            Mat compressed = v.adjoint() * sa.at(a, x) * v;  // rank x rank
            out.ma.at(a, x) = hermitize(
                Mat(inv_sqrt.asDiagonal() * compressed * inv_sqrt.asDiagonal()));
        }
    return out;
}

StateAssemblage dress(const MeasurementAssemblage& ma, const Mat& rho_b) {
    if (rho_b.rows() != ma.dim)
        throw ValidationError("dress: state dimension must match assemblage dimension");
    Mat s = linop::sqrt_psd(rho_b);
    StateAssemblage sa;
    sa.dim = ma.dim;
    sa.n_settings = ma.n_settings;
    sa.n_outcomes = ma.n_outcomes;
    sa.elements.resize(ma.elements.size());
    for (size_t i = 0; i < ma.elements.size(); ++i)
        sa.elements[i] = hermitize(Mat(s * ma.elements[i] * s));
    sa.reduced_state = hermitize(Mat(s * s));
    return sa;
}

DeterministicStrategyTable enumerate_deterministic(int n_settings, int n_outcomes,
                                                   std::int64_t cap) {
    if (n_settings < 1 || n_outcomes < 1)
        throw ValidationError("enumerate_deterministic: scenario must be nonempty");
    std::int64_t n = 1;
    for (int x = 0; x < n_settings; ++x) {
        n *= n_outcomes;
        if (n > cap)
            throw ValidationError("enumerate_deterministic: strategy count exceeds cap");
    }
    DeterministicStrategyTable t;
    t.n_settings = n_settings;
    t.n_outcomes = n_outcomes;
    t.n_strategies = static_cast<int>(n);
    return t;
}

MeasurementAssemblage transpose_ma(const MeasurementAssemblage& ma) {
    MeasurementAssemblage out = ma;
    for (auto& m : out.elements) m = m.transpose().eval();
    return out;
}

MeasurementAssemblage trivial_ma(int dim, int n_settings, int n_outcomes) {
    MeasurementAssemblage ma;
    ma.dim = dim;
    ma.n_settings = n_settings;
    ma.n_outcomes = n_outcomes;
    ma.elements.assign(static_cast<size_t>(n_settings) * n_outcomes,
                       Mat(linop::identity(dim) / double(n_outcomes)));
    return ma;
}

}  // namespace assemblage
}  // namespace steerkit
