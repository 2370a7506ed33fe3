#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "reach/contraction.hpp"
#include "reach/model.hpp"

namespace reach {

/// One linear matrix inequality: constant + sum_v x_v * coeff_v >= 0 (PSD).
/// All matrices are symmetric and share one dimension.
struct LmiConstraint {
    Matrix constant;
    std::vector<std::pair<std::size_t, Matrix>> coeffs;  // (decision variable, coefficient)
    std::string label;

    Matrix evaluate(const std::vector<double>& x) const;
};

/// Decision-variable layout: per block, coordinates over the standard
/// symmetric basis (diagonal elements first, then unit off-diagonal pairs).
class SdpLayout {
  public:
    explicit SdpLayout(const std::vector<std::size_t>& block_dims);

    std::size_t block_count() const { return dims_.size(); }
    std::size_t block_dim(std::size_t b) const { return dims_[b]; }
    std::size_t basis_size(std::size_t b) const { return dims_[b] * (dims_[b] + 1) / 2; }
    std::size_t offset(std::size_t b) const { return offsets_[b]; }
    std::size_t variable(std::size_t b, std::size_t l) const { return offsets_[b] + l; }
    std::size_t total_variables() const { return total_; }

    /// l-th basis element of block b: E_ss for l < n, then e_s e_t^T + e_t e_s^T.
    Matrix basis_element(std::size_t b, std::size_t l) const;

    /// Assemble Gamma_b = sum_l x_{b,l} E_{b,l}.
    Matrix gamma(std::size_t b, const std::vector<double>& x) const;

    /// Coordinates of Gamma_b = identity.
    void set_identity(std::size_t b, std::vector<double>& x) const;

    double trace(std::size_t b, const std::vector<double>& x) const;

  private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> offsets_;
    std::size_t total_ = 0;
};

/// Vertex families for block pair (i, j) over the domain, one family per
/// basis element of block i.
///
/// i == j: the family {E_l J_ii(z) + J_ii(z)^T E_l} is affine in the
/// enclosed Jacobian entries, so its vertices are corner evaluations of the
/// entry intervals (deduplicated). At most 12 non-degenerate entries.
///
/// i != j: {J_ij(z)^T E_l J_ij(z)} is quadratic in the entries; a sound
/// two-vertex envelope {G_mid - rho*I, G_mid + rho*I} is built from the
/// interval evaluation of the product, with rho the max row sum of the
/// radius matrix. The envelope collapses to one vertex when J_ij is
/// constant over the domain.
std::vector<std::vector<Matrix>> vertex_families(const Model& m, const IntervalBox& domain,
                                                 const Interval& t_range, std::size_t i,
                                                 std::size_t j,
                                                 const std::vector<Matrix>& basis);

struct FiniteSdp {
    SdpLayout layout;
    std::vector<LmiConstraint> constraints;
    Matrix targets;
};

/// Reduce the infinite constraint family ("for all (t,x) in the domain") to
/// finitely many LMIs via the vertex families, one LMI per vertex tuple:
///   (a) Gamma_i >= margin*I per block,
///   (b) Gamma_i J_ii + J_ii^T Gamma_i <= 2 c_ii Gamma_i per diagonal tuple,
///   (c) J_ij^T Gamma_i J_ij <= c_ij^2 Gamma_j per cross tuple.
/// Off-diagonal targets must be >= 0. Throws on vertex explosion (total LMI
/// count above 1e5).
FiniteSdp build_finite_sdp(const Model& m, const IntervalBox& domain, const Interval& t_range,
                           const Matrix& targets, double margin = 1e-4);

struct CertificationRecord {
    bool ok = false;
    std::vector<double> lambda_mins;  // per constraint, recomputed
    std::size_t worst_index = 0;
    double worst_value = 0.0;
};

struct WeightSolution {
    std::vector<Matrix> gammas;   // per block, symmetric positive definite
    std::vector<Matrix> weights;  // P_i = Gamma_i^(1/2)
    Matrix targets;               // the C this was solved for
    std::vector<double> x;        // decision vector (audit)
    double achieved_t = 0.0;      // min over constraints of lambda_min
    CertificationRecord certification;
};

struct SolveOutcome {
    bool success = false;
    WeightSolution solution;
    std::string message;
    int iterations = 0;
};

/// Feasibility search: maximize t = min_c lambda_min(constraint_c(x)) by
/// projected subgradient ascent (eigenvector outer-product subgradients)
/// with per-block trace normalization trace(Gamma_i) = n_i. Success
/// requires t >= 0 at the returned point, confirmed by an independent
/// certification pass. Failure means "no certificate found", not a proof
/// of infeasibility.
SolveOutcome solve_feasibility(const FiniteSdp& sdp, std::uint64_t seed, int max_iterations = 5000);

/// Recompute every constraint's minimum eigenvalue at the solution with the
/// Jacobi eigensolver, trusting nothing from the solver run. Rejects when
/// any eigenvalue is below -1e-9.
CertificationRecord certify(const WeightSolution& solution, const FiniteSdp& sdp);

/// NormSpecs (kind Two, weight P_i) ready to install into a model.
std::vector<NormSpec> to_norm_specs(const WeightSolution& solution);

/// JSON fragment for the model file's "norms" field, plus the certification
/// record as a separate report document.
std::string norms_fragment_json(const WeightSolution& solution);
std::string certification_report_json(const WeightSolution& solution);

/// Heuristic: bisect each diagonal target downward (off-diagonals and the
/// other diagonals fixed) to the smallest certifiable value, then re-solve.
/// Returns the outcome at the tuned targets.
SolveOutcome tune_c(const Model& m, const IntervalBox& domain, const Interval& t_range,
                    Matrix targets, std::uint64_t seed, int bisection_steps = 12);

}  // namespace reach
