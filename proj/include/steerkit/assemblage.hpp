#pragma once

#include <cstdint>
#include <vector>

#include "steerkit/linop.hpp"

namespace steerkit {

/// One POVM: elements indexed by outcome, PSD, summing to the identity.
struct Povm {
    int dim = 0;
    std::vector<Mat> elements;
};

/// A family of POVMs {M_{a|x}}: element(a, x) for outcome a, setting x.
/// Ragged outcome counts are represented by padding with zero operators.
struct MeasurementAssemblage {
    int dim = 0;
    int n_settings = 0;
    int n_outcomes = 0;
    std::vector<Mat> elements;  // row-major: index a + n_outcomes * x

    Mat& at(int a, int x) { return elements[a + n_outcomes * x]; }
    const Mat& at(int a, int x) const { return elements[a + n_outcomes * x]; }
};

/// Subnormalized conditional states {sigma_{a|x}} with a common,
/// setting-independent reduced state of trace 1.
struct StateAssemblage {
    int dim = 0;
    int n_settings = 0;
    int n_outcomes = 0;
    std::vector<Mat> elements;
    Mat reduced_state;

    Mat& at(int a, int x) { return elements[a + n_outcomes * x]; }
    const Mat& at(int a, int x) const { return elements[a + n_outcomes * x]; }
};

/// 0/1 response table D(a|x,lambda) over all deterministic strategies.
/// lambda is mixed-radix with setting 0 as the fastest digit:
/// lambda = sum_x a_x * n_outcomes^x.
struct DeterministicStrategyTable {
    int n_settings = 0;
    int n_outcomes = 0;
    int n_strategies = 0;

    int answer(int x, int lambda) const {
        int v = lambda;
        for (int k = 0; k < x; ++k) v /= n_outcomes;
        return v % n_outcomes;
    }
    bool d(int a, int x, int lambda) const { return answer(x, lambda) == a; }
};

struct ConstraintResidual {
    std::string name;
    double residual = 0.0;
    double tol = 0.0;
    bool pass = true;
};

struct ValidationReport {
    std::vector<ConstraintResidual> checks;
    bool passed = true;

    void add(std::string name, double residual, double tol);
};

namespace assemblage {

ValidationReport validate_povm(const Povm& p, double tol = 1e-9);
ValidationReport validate_ma(const MeasurementAssemblage& ma, double tol = 1e-9);
ValidationReport validate_sa(const StateAssemblage& sa, double tol = 1e-8);

/// sigma_{a|x} = tr_A[rho_AB (A_{a|x} (x) 1)].
StateAssemblage assemblage_from_state(const Mat& rho_ab, const MeasurementAssemblage& ma);

/// Assemblage of the Schmidt-form pure state sum_i c_i |ii>:
/// sigma_{a|x} = [rho^{1/2} A_{a|x} rho^{1/2}]^T with rho = diag(c_i^2),
/// transposition in the basis where rho is diagonal.
StateAssemblage pure_state_assemblage(const RVec& schmidt_coeffs,
                                      const MeasurementAssemblage& ma);

struct SeoResult {
    MeasurementAssemblage ma;  // on the range of rho_b (dim = rank)
    Mat rho_b;                 // as given
    Mat isometry;              // dim x rank; columns span range(rho_b)
    int rank = 0;
};

/// Steering-equivalent observables B_{a|x} = rho^{-1/2} sigma_{a|x} rho^{-1/2}.
/// A rank-deficient reduced state is compressed to its range via the ordered
/// eigenvector isometry (descending eigenvalues, phase fixed so the
/// largest-magnitude component of each column is real positive).
SeoResult seo(const StateAssemblage& sa, double rank_tol = 1e-9);

/// sigma_{a|x} = rho^{1/2} B_{a|x} rho^{1/2}.
StateAssemblage dress(const MeasurementAssemblage& ma, const Mat& rho_b);

/// All deterministic strategies for the given scenario; the count
/// n_outcomes^n_settings must not exceed `cap`.
DeterministicStrategyTable enumerate_deterministic(int n_settings, int n_outcomes,
                                                   std::int64_t cap = 1000000);

MeasurementAssemblage transpose_ma(const MeasurementAssemblage& ma);

/// The trivial (jointly measurable) assemblage M_{a|x} = 1/n_outcomes.
MeasurementAssemblage trivial_ma(int dim, int n_settings, int n_outcomes);

}  // namespace assemblage
}  // namespace steerkit
