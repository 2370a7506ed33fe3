#pragma once

#include <optional>
#include <vector>

#include "reach/matrix.hpp"

namespace reach {

enum class NormKind { One, Two, Inf };

const char* norm_kind_name(NormKind k);

/// A vector norm on a block: |x|_1, |x|_2 or |x|_inf, optionally weighted.
/// For Two the weight is a full invertible matrix P and the norm is
/// x -> |Px|_2; for One/Inf the weight must be diagonal with strictly
/// positive diagonal (represented as a full matrix, validated on
/// construction).
class NormSpec {
  public:
    explicit NormSpec(NormKind kind) : kind_(kind) {}
    NormSpec(NormKind kind, Matrix weight);

    NormKind kind() const { return kind_; }
    bool weighted() const { return weight_.has_value(); }
    const Matrix& weight() const { return *weight_; }

    /// Inverse of the weight, computed once at construction.
    const Matrix& weight_inverse() const { return *weight_inv_; }

    std::size_t dim() const { return weight_ ? weight_->rows() : 0; }

    /// |v| in this norm.
    double vector_norm(const std::vector<double>& v) const;

  private:
    NormKind kind_;
    std::optional<Matrix> weight_;
    std::optional<Matrix> weight_inv_;
};

/// Unweighted vector norms.
double vector_norm(const std::vector<double>& v, NormKind kind);

// ---------------------------------------------------------------------------
// Symmetric eigenproblem (cyclic Jacobi)
// ---------------------------------------------------------------------------

struct EigResult {
    std::vector<double> values;  // ascending
    Matrix vectors;              // columns are eigenvectors, same order
};

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
/// The input is symmetrized internally; inputs with relative asymmetry
/// above 1e-10 are rejected.
EigResult sym_eig(const Matrix& s);

double sym_eig_max(const Matrix& s);
double sym_eig_min(const Matrix& s);

/// Principal square root of a symmetric positive semidefinite matrix.
/// Small negative eigenvalues (above -tol) are clamped to zero.
Matrix sym_sqrt(const Matrix& s, double tol = 1e-12);

// ---------------------------------------------------------------------------
// Induced norms and matrix measures
// ---------------------------------------------------------------------------

/// Induced matrix norm ||A|| for the given (possibly weighted) norm.
double matrix_norm(const Matrix& a, const NormSpec& norm);

/// Matrix measure (logarithmic norm) mu(A); may be negative.
double matrix_measure(const Matrix& a, const NormSpec& norm);

/// Mixed norm ||A||_{p_i,p_j} = max_{|x|_{p_j}=1} |Ax|_{p_i} for an
/// n_i x n_j block. Only matching kinds are supported; mixing e.g. One
/// into Inf is rejected because the exact value is not computable from
/// the closed forms used here.
double mixed_norm(const Matrix& a, const NormSpec& norm_i, const NormSpec& norm_j);

// ---------------------------------------------------------------------------
// Matrix exponential
// ---------------------------------------------------------------------------

/// expm(C*t) by scaling-and-squaring with a Pade(6) approximant.
/// For Metzler C and t >= 0 the result is clamped entrywise to be
/// nonnegative; rounding can otherwise leave tiny negative entries and
/// the radii propagation needs a nonnegative matrix to stay sound.
Matrix expm(const Matrix& c, double t);

bool is_metzler(const Matrix& c, double tol = 0.0);

/// k x k gain matrix: diagonal entries bound block measures, off-diagonal
/// entries bound cross-block norms. Off-diagonal entries must be >= 0.
class GainMatrix {
  public:
    explicit GainMatrix(Matrix c);

    const Matrix& matrix() const { return c_; }
    std::size_t size() const { return c_.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return c_(i, j); }

  private:
    Matrix c_;
};

}  // namespace reach
