#include "steerkit/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace steerkit::conic {

int ConicProblem::total_vec_dim() const {
    int n = 0;
    for (int d : block_dims) n += svec_dim(d);
    return n;
}

RVec svec(const RMat& m) {
    const int d = static_cast<int>(m.rows());
    RVec v(svec_dim(d));
    const double rt2 = std::sqrt(2.0);
    int k = 0;
    for (int j = 0; j < d; ++j)
        for (int i = 0; i <= j; ++i)
            v(k++) = (i == j) ? m(i, j) : rt2 * 0.5 * (m(i, j) + m(j, i));
    return v;
}

RMat smat(const RVec& v, int d) {
    RMat m(d, d);
    const double inv_rt2 = 1.0 / std::sqrt(2.0);
    int k = 0;
    for (int j = 0; j < d; ++j)
        for (int i = 0; i <= j; ++i) {
            double val = v(k++);
            if (i == j) {
                m(i, j) = val;
            } else {
                m(i, j) = val * inv_rt2;
                m(j, i) = m(i, j);
            }
        }
    return m;
}

RMat embed_complex(const Mat& h) {
    const int d = static_cast<int>(h.rows());
    RMat e(2 * d, 2 * d);
    e.topLeftCorner(d, d) = h.real();
    e.bottomRightCorner(d, d) = h.real();
    e.topRightCorner(d, d) = -h.imag();
    e.bottomLeftCorner(d, d) = h.imag();
    return 0.5 * (e + e.transpose());
}

Mat unembed_complex(const RMat& e) {
    const int d = static_cast<int>(e.rows()) / 2;
    RMat re = 0.5 * (e.topLeftCorner(d, d) + e.bottomRightCorner(d, d));
    RMat im = 0.5 * (e.bottomLeftCorner(d, d) - e.topRightCorner(d, d));
    Mat h = re.cast<Cplx>() + Cplx(0, 1) * im.cast<Cplx>();
    return 0.5 * (h + h.adjoint());
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::MaxIter: return "max-iter";
        case SolveStatus::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

namespace {

struct BlockLayout {
    std::vector<int> dims;
    std::vector<int> offsets;  // into the stacked svec
    int total = 0;

    explicit BlockLayout(const std::vector<int>& d) : dims(d) {
        offsets.resize(d.size());
        for (size_t k = 0; k < d.size(); ++k) {
            offsets[k] = total;
            total += svec_dim(d[k]);
        }
    }
};

std::vector<RMat> to_blocks(const RVec& v, const BlockLayout& lay) {
    std::vector<RMat> out(lay.dims.size());
    for (size_t k = 0; k < lay.dims.size(); ++k)
        out[k] = smat(v.segment(lay.offsets[k], svec_dim(lay.dims[k])), lay.dims[k]);
    return out;
}

RVec to_vec(const std::vector<RMat>& blocks, const BlockLayout& lay) {
    RVec v(lay.total);
    for (size_t k = 0; k < blocks.size(); ++k)
        v.segment(lay.offsets[k], svec_dim(lay.dims[k])) = svec(blocks[k]);
    return v;
}

// Projection onto the complex-embedding subspace: average with J X J',
// J = [[0,-I],[I,0]]. Blocks not flagged are left alone.
void symmetry_average(std::vector<RMat>& blocks, const std::vector<bool>& flags) {
    if (flags.empty()) return;
    for (size_t k = 0; k < blocks.size(); ++k) {
        if (!flags[k]) continue;
        const int d = static_cast<int>(blocks[k].rows()) / 2;
        RMat p = blocks[k].topLeftCorner(d, d);
        RMat r = blocks[k].bottomRightCorner(d, d);
        RMat q = blocks[k].topRightCorner(d, d);
        RMat avg_diag = 0.5 * (p + r);
        RMat avg_off = 0.5 * (q - q.transpose());
        blocks[k].topLeftCorner(d, d) = avg_diag;
        blocks[k].bottomRightCorner(d, d) = avg_diag;
        blocks[k].topRightCorner(d, d) = avg_off;
        blocks[k].bottomLeftCorner(d, d) = -avg_off;
    }
}

struct Presolve {
    RMat a;               // reduced, row-normalized
    RVec b;
    std::vector<int> kept;      // original row indices
    std::vector<double> scale;  // norm of each kept original row
    bool inconsistent = false;
};

Presolve presolve_rows(const RMat& a, const RVec& b) {
    Presolve out;
    const int m = static_cast<int>(a.rows());
    const int n = static_cast<int>(a.cols());
    RMat q(m, n);  // orthonormal basis of kept rows
    RVec beta(m);  // rhs in the orthonormal frame
    int r = 0;
    for (int i = 0; i < m; ++i) {
        double nrm = a.row(i).norm();
        if (nrm < 1e-14) {
            if (std::abs(b(i)) > 1e-10) out.inconsistent = true;
            continue;
        }
        RVec v = a.row(i).transpose() / nrm;
        double rhs = b(i) / nrm;
        RVec coef(r);
        for (int j = 0; j < r; ++j) {
            coef(j) = q.row(j).dot(v.transpose());
            v -= coef(j) * q.row(j).transpose();
        }
        // second Gram-Schmidt pass for numerical orthogonality
        for (int j = 0; j < r; ++j) {
            double c2 = q.row(j).dot(v.transpose());
            coef(j) += c2;
            v -= c2 * q.row(j).transpose();
        }
        double res = v.norm();
        if (res < 1e-10) {
            double implied = 0.0;
            for (int j = 0; j < r; ++j) implied += coef(j) * beta(j);
            if (std::abs(rhs - implied) > 1e-8 * std::max(1.0, std::abs(rhs)))
                out.inconsistent = true;
            continue;
        }
        q.row(r) = v.transpose() / res;
        double brem = rhs;
        for (int j = 0; j < r; ++j) brem -= coef(j) * beta(j);
        beta(r) = brem / res;
        ++r;
        out.kept.push_back(i);
        out.scale.push_back(nrm);
    }
    out.a.resize(r, n);
    out.b.resize(r);
    for (int j = 0; j < r; ++j) {
        out.a.row(j) = a.row(out.kept[j]) / out.scale[j];
        out.b(j) = b(out.kept[j]) / out.scale[j];
    }
    return out;
}

struct NtScaling {
    // Per block: W (scaling matrix), R / Rinv factors, lambda (scaled spectrum)
    std::vector<RMat> w, r, r_inv;
    std::vector<RVec> lambda;
};

bool compute_nt(const std::vector<RMat>& x, const std::vector<RMat>& s, NtScaling& nt) {
    const size_t nb = x.size();
    nt.w.resize(nb);
    nt.r.resize(nb);
    nt.r_inv.resize(nb);
    nt.lambda.resize(nb);
    for (size_t k = 0; k < nb; ++k) {
        Eigen::SelfAdjointEigenSolver<RMat> es(s[k]);
        if (es.info() != Eigen::Success) return false;
        RVec sv = es.eigenvalues();
        double smax = sv.maxCoeff();
        if (smax <= 0) return false;
        for (int i = 0; i < sv.size(); ++i) sv(i) = std::max(sv(i), 1e-15 * smax);
        RVec s_half = sv.array().sqrt();
        RVec s_ihalf = s_half.cwiseInverse();
        const RMat& qs = es.eigenvectors();
        RMat sh = qs * s_half.asDiagonal() * qs.transpose();
        RMat sih = qs * s_ihalf.asDiagonal() * qs.transpose();
        RMat t = sh * x[k] * sh;
        t = 0.5 * (t + t.transpose());
        Eigen::SelfAdjointEigenSolver<RMat> et(t);
        if (et.info() != Eigen::Success) return false;
        RVec tv = et.eigenvalues();
        double tmax = tv.maxCoeff();
        if (tmax <= 0) return false;
        for (int i = 0; i < tv.size(); ++i) tv(i) = std::max(tv(i), 1e-28 * tmax);
        RVec t_q = tv.array().pow(0.25);
        RVec t_iq = t_q.cwiseInverse();
        const RMat& qt = et.eigenvectors();
        nt.r[k] = sih * qt * t_q.asDiagonal();
        nt.r_inv[k] = t_iq.asDiagonal() * qt.transpose() * sh;
        nt.w[k] = nt.r[k] * nt.r[k].transpose();
        nt.w[k] = 0.5 * (nt.w[k] + nt.w[k].transpose());
        nt.lambda[k] = tv.array().sqrt();
    }
    return true;
}

// Largest alpha with X + alpha*D still PSD, given a Cholesky-capable X.
double max_step(const RMat& x, const RMat& d) {
    Eigen::LLT<RMat> llt(x);
    RMat l;
    if (llt.info() == Eigen::Success) {
        l = llt.matrixL();
    } else {
        RMat xj = x + 1e-14 * std::max(1.0, x.norm()) * RMat::Identity(x.rows(), x.cols());
        Eigen::LLT<RMat> llt2(xj);
        if (llt2.info() != Eigen::Success) return 0.0;
        l = llt2.matrixL();
    }
    RMat y = l.triangularView<Eigen::Lower>().solve(d);
    y = l.triangularView<Eigen::Lower>().solve(RMat(y.transpose()));
    y = 0.5 * (y + y.transpose());
    Eigen::SelfAdjointEigenSolver<RMat> es(y, Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    if (lmin >= -1e-16) return 1e30;
    return -1.0 / lmin;
}

bool all_psd(const std::vector<RMat>& blocks, double tol) {
    for (const auto& m : blocks) {
        Eigen::SelfAdjointEigenSolver<RMat> es(m, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < tol) return false;
    }
    return true;
}

}  // namespace

ConicSolution solve(const ConicProblem& prob, const SolveSettings& settings) {
    const BlockLayout lay(prob.block_dims);
    const int n = lay.total;
    const size_t nb = prob.block_dims.size();
    int ndeg = 0;  // total matrix order = barrier degree
    for (int d : prob.block_dims) ndeg += d;

    RVec c = prob.maximize ? RVec(-prob.c) : prob.c;
    const double sign = prob.maximize ? -1.0 : 1.0;

    ConicSolution sol;
    sol.y = RVec::Zero(prob.a.rows());

    Presolve ps = presolve_rows(prob.a, prob.b);
    if (ps.inconsistent) {
        sol.status = SolveStatus::Infeasible;
        return sol;
    }
    const RMat& a = ps.a;
    const RVec& b = ps.b;
    const int m = static_cast<int>(a.rows());

    std::vector<RMat> cblk = to_blocks(c, lay);

    // Interior start: identity blocks scaled to the problem data.
    const double xi_p = 10.0 * std::max(1.0, (m > 0) ? b.cwiseAbs().maxCoeff() : 0.0);
    const double xi_d = 10.0 * std::max(1.0, c.size() ? c.cwiseAbs().maxCoeff() : 0.0);
    std::vector<RMat> x(nb), s(nb);
    for (size_t k = 0; k < nb; ++k) {
        x[k] = xi_p * RMat::Identity(prob.block_dims[k], prob.block_dims[k]);
        s[k] = xi_d * RMat::Identity(prob.block_dims[k], prob.block_dims[k]);
    }
    RVec y = RVec::Zero(m);

    const double bscale = std::max(1.0, (m > 0) ? b.cwiseAbs().maxCoeff() : 0.0);
    const double cscale = std::max(1.0, c.size() ? c.cwiseAbs().maxCoeff() : 0.0);

    auto finish = [&](SolveStatus st, int iters) {
        RVec xv = to_vec(x, lay);
        sol.x = x;
        sol.s = s;
        sol.y = RVec::Zero(prob.a.rows());
        for (int j = 0; j < m; ++j) sol.y(ps.kept[j]) = y(j) / ps.scale[j];
        double pobj = c.dot(xv);
        double dobj = (m > 0) ? b.dot(y) : 0.0;
        sol.primal_obj = sign * pobj;
        sol.dual_obj = sign * dobj;
        double compl_ = 0.0;
        for (size_t k = 0; k < nb; ++k) compl_ += (x[k].cwiseProduct(s[k])).sum();
        sol.gap = compl_ / std::max(1.0, 0.5 * (std::abs(pobj) + std::abs(dobj)));
        sol.primal_residual = (m > 0) ? (a * xv - b).cwiseAbs().maxCoeff() / bscale : 0.0;
        RVec aty = (m > 0) ? RVec(a.transpose() * y) : RVec::Zero(n);
        double dres = 0.0;
        std::vector<RMat> atyb = to_blocks(aty, lay);
        for (size_t k = 0; k < nb; ++k)
            dres = std::max(dres, (cblk[k] - atyb[k] - s[k]).cwiseAbs().maxCoeff());
        sol.dual_residual = dres / cscale;
        sol.status = st;
        sol.iterations = iters;
        return sol;
    };

    double mu_prev = 1e300;
    int stall = 0;

    for (int iter = 0; iter < settings.max_iter; ++iter) {
        RVec xv = to_vec(x, lay);
        RVec rp = (m > 0) ? RVec(b - a * xv) : RVec(0);
        RVec aty = (m > 0) ? RVec(a.transpose() * y) : RVec::Zero(n);
        std::vector<RMat> atyb = to_blocks(aty, lay);
        std::vector<RMat> rd(nb);
        double dres = 0.0;
        for (size_t k = 0; k < nb; ++k) {
            rd[k] = cblk[k] - atyb[k] - s[k];
            dres = std::max(dres, rd[k].cwiseAbs().maxCoeff());
        }
        dres /= cscale;
        double pres = (m > 0) ? rp.cwiseAbs().maxCoeff() / bscale : 0.0;

        double compl_ = 0.0;
        for (size_t k = 0; k < nb; ++k) compl_ += (x[k].cwiseProduct(s[k])).sum();
        double pobj = c.dot(xv);
        double dobj = (m > 0) ? b.dot(y) : 0.0;
        double gap = compl_ / std::max(1.0, 0.5 * (std::abs(pobj) + std::abs(dobj)));

        if (pres <= settings.feas_tol && dres <= settings.feas_tol && gap <= settings.gap_tol)
            return finish(SolveStatus::Optimal, iter);

        // Improving-ray certificates.
        if (m > 0 && iter >= 5) {
            double ynorm = y.norm();
            if (ynorm > 1e-8) {
                RVec ray = a.transpose() * y;
                std::vector<RMat> rayb = to_blocks(RVec(-ray), lay);
                double raynorm = ray.cwiseAbs().maxCoeff() + 1e-300;
                bool psd_ray = all_psd(rayb, -1e-8 * raynorm);
                if (psd_ray && b.dot(y) > 1e-6 * ynorm &&
                    b.dot(y) > 1e4 * raynorm * 0.0 + 1e-6 && y.norm() > 1e8)
                    return finish(SolveStatus::Infeasible, iter);
            }
            double xnorm = xv.cwiseAbs().maxCoeff();
            if (xnorm > 1e8) {
                RVec xdir = xv / xnorm;
                double feas = (a * xdir).cwiseAbs().maxCoeff();
                if (feas < 1e-8 && c.dot(xdir) < -1e-8)
                    return finish(SolveStatus::Unbounded, iter);
            }
        }

        double mu = compl_ / std::max(1, ndeg);
        if (mu > 0.9 * mu_prev) {
            if (++stall > 15) return finish(SolveStatus::NumericalFailure, iter);
        } else {
            stall = 0;
        }
        mu_prev = mu;

        NtScaling nt;
        if (!compute_nt(x, s, nt)) return finish(SolveStatus::NumericalFailure, iter);

        // Schur complement M = A (W kron_s W) A'.
        RMat aww;
        Eigen::LDLT<RMat> mfac;
        if (m > 0) {
            aww.resize(m, n);
            for (int i = 0; i < m; ++i) {
                std::vector<RMat> ai = to_blocks(RVec(a.row(i).transpose()), lay);
                for (size_t k = 0; k < nb; ++k) {
                    RMat waw = nt.w[k] * ai[k] * nt.w[k];
                    aww.block(i, lay.offsets[k], 1, svec_dim(lay.dims[k])) =
                        svec(RMat(0.5 * (waw + waw.transpose()))).transpose();
                }
            }
            RMat schur = a * aww.transpose();
            schur = 0.5 * (schur + schur.transpose());
            double reg = 0.0;
            for (int attempt = 0; attempt < 6; ++attempt) {
                RMat sreg = schur;
                if (reg > 0) sreg += reg * RMat::Identity(m, m);
                mfac.compute(sreg);
                if (mfac.info() == Eigen::Success && mfac.isPositive()) break;
                reg = (reg == 0) ? 1e-13 * std::max(1.0, schur.trace() / m) : reg * 100;
                if (attempt == 5) return finish(SolveStatus::NumericalFailure, iter);
            }
        }

        auto newton = [&](const std::vector<RMat>& rc, std::vector<RMat>& dx, RVec& dy,
                          std::vector<RMat>& ds) {
            // dS = Rd - mat(A' dy);  dX = Rc - W dS W;  A vec dX = rp.
            RVec rhs;
            if (m > 0) {
                std::vector<RMat> tmp(nb);
                for (size_t k = 0; k < nb; ++k)
                    tmp[k] = rc[k] - nt.w[k] * rd[k] * nt.w[k];
                rhs = rp - a * to_vec(tmp, lay);
                dy = mfac.solve(rhs);
            } else {
                dy.resize(0);
            }
            RVec atdy = (m > 0) ? RVec(a.transpose() * dy) : RVec::Zero(n);
            std::vector<RMat> atdyb = to_blocks(atdy, lay);
            ds.resize(nb);
            dx.resize(nb);
            for (size_t k = 0; k < nb; ++k) {
                ds[k] = rd[k] - atdyb[k];
                ds[k] = 0.5 * (ds[k] + ds[k].transpose());
                dx[k] = rc[k] - nt.w[k] * ds[k] * nt.w[k];
                dx[k] = 0.5 * (dx[k] + dx[k].transpose());
            }
            symmetry_average(dx, prob.complex_embedded);
            symmetry_average(ds, prob.complex_embedded);
        };

        // Predictor (affine scaling direction).
        std::vector<RMat> rc_aff(nb);
        for (size_t k = 0; k < nb; ++k) rc_aff[k] = -x[k];
        std::vector<RMat> dxa, dsa;
        RVec dya;
        newton(rc_aff, dxa, dya, dsa);

        double ap_aff = 1.0, ad_aff = 1.0;
        for (size_t k = 0; k < nb; ++k) {
            ap_aff = std::min(ap_aff, max_step(x[k], dxa[k]));
            ad_aff = std::min(ad_aff, max_step(s[k], dsa[k]));
        }
        double mu_aff = 0.0;
        for (size_t k = 0; k < nb; ++k)
            mu_aff += ((x[k] + ap_aff * dxa[k]).cwiseProduct(s[k] + ad_aff * dsa[k])).sum();
        mu_aff = std::max(0.0, mu_aff / std::max(1, ndeg));
        double sigma = std::pow(mu_aff / mu, 3.0);
        sigma = std::clamp(sigma, 1e-12, 1.0);

        // Corrector with Mehrotra second-order term in the scaled frame.
        std::vector<RMat> rc(nb);
        for (size_t k = 0; k < nb; ++k) {
            RMat dxh = nt.r_inv[k] * dxa[k] * nt.r_inv[k].transpose();
            RMat dsh = nt.r[k].transpose() * dsa[k] * nt.r[k];
            RMat cross = 0.5 * (dxh * dsh + dsh * dxh);
            const RVec& lam = nt.lambda[k];
            const int d = lay.dims[k];
            RMat g = -cross;
            for (int i = 0; i < d; ++i) g(i, i) += sigma * mu - lam(i) * lam(i);
            RMat h(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) h(i, j) = 2.0 * g(i, j) / (lam(i) + lam(j));
            RMat rck = nt.r[k] * h * nt.r[k].transpose();
            rc[k] = 0.5 * (rck + rck.transpose());
        }
        std::vector<RMat> dx, ds;
        RVec dy;
        newton(rc, dx, dy, ds);

        double eta = (iter < 3) ? 0.9 : ((gap < 1e-6) ? 0.99 : 0.97);
        double ap = 1.0, ad = 1.0;
        for (size_t k = 0; k < nb; ++k) {
            ap = std::min(ap, eta * max_step(x[k], dx[k]));
            ad = std::min(ad, eta * max_step(s[k], ds[k]));
        }
        ap = std::min(ap, 1.0);
        ad = std::min(ad, 1.0);

        // Safety backtracking: keep iterates safely positive definite.
        for (int bt = 0; bt < 30; ++bt) {
            std::vector<RMat> xt(nb);
            bool ok = true;
            for (size_t k = 0; k < nb && ok; ++k) {
                xt[k] = x[k] + ap * dx[k];
                Eigen::LLT<RMat> llt(xt[k]);
                ok = (llt.info() == Eigen::Success);
            }
            if (ok) break;
            ap *= 0.8;
        }
        for (int bt = 0; bt < 30; ++bt) {
            std::vector<RMat> st(nb);
            bool ok = true;
            for (size_t k = 0; k < nb && ok; ++k) {
                st[k] = s[k] + ad * ds[k];
                Eigen::LLT<RMat> llt(st[k]);
                ok = (llt.info() == Eigen::Success);
            }
            if (ok) break;
            ad *= 0.8;
        }
        if (ap < 1e-10 && ad < 1e-10) return finish(SolveStatus::NumericalFailure, iter);

        for (size_t k = 0; k < nb; ++k) {
            x[k] += ap * dx[k];
            s[k] += ad * ds[k];
        }
        y += ad * dy;
        symmetry_average(x, prob.complex_embedded);
        symmetry_average(s, prob.complex_embedded);
    }
    return finish(SolveStatus::MaxIter, settings.max_iter);
}

std::string dump_sparse(const ConicProblem& p) {
    // One line per nonzero: constraint index (0 = objective), block, i, j, value.
    // Upper-triangle entries only, with the svec scaling undone.
    std::ostringstream os;
    const BlockLayout lay(p.block_dims);
    os << p.a.rows() << "\n" << p.block_dims.size() << "\n";
    for (size_t k = 0; k < p.block_dims.size(); ++k)
        os << p.block_dims[k] << (k + 1 < p.block_dims.size() ? " " : "\n");
    for (int i = 0; i < p.b.size(); ++i) os << p.b(i) << (i + 1 < p.b.size() ? " " : "");
    os << "\n";
    char buf[64];
    auto emit = [&](int row, const RVec& v) {
        std::vector<RMat> blocks = to_blocks(v, lay);
        for (size_t k = 0; k < blocks.size(); ++k)
            for (int i = 0; i < p.block_dims[k]; ++i)
                for (int j = i; j < p.block_dims[k]; ++j)
                    if (std::abs(blocks[k](i, j)) > 0) {
                        std::snprintf(buf, sizeof(buf), "%.17g", blocks[k](i, j));
                        os << row << " " << k << " " << i << " " << j << " " << buf << "\n";
                    }
    };
    emit(0, p.c);
    for (int r = 0; r < p.a.rows(); ++r) emit(r + 1, RVec(p.a.row(r).transpose()));
    return os.str();
}

}  // namespace steerkit::conic
