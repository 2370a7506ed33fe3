#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reach/expr.hpp"
#include "reach/interval.hpp"
#include "reach/linalg.hpp"

namespace reach {

/// Per-coordinate closed intervals; the enclosure domains J is bounded over.
using IntervalBox = std::vector<Interval>;

/// Grouping of the state indices 0..n-1 into k disjoint blocks. Blocks need
/// not be contiguous; they are index lists.
struct Partition {
    std::vector<std::vector<std::size_t>> blocks;

    std::size_t block_count() const { return blocks.size(); }
    std::size_t block_size(std::size_t i) const { return blocks[i].size(); }

    /// Throws ModelError unless the blocks are disjoint, nonempty and cover 0..n-1.
    void validate(std::size_t n) const;
};

/// A user-asserted replacement for one gain-matrix entry (block indices).
struct GainOverride {
    std::size_t i = 0, j = 0;
    double value = 0.0;
};

/// Parsed system description: named states, vector field, symbolic Jacobian,
/// block partition with one norm per block, and optional enclosure data.
/// Immutable after construction; safe to share across threads.
class Model {
  public:
    /// Build and fully validate a model from its raw parts. Expression
    /// strings are parsed here; the Jacobian is derived symbolically when
    /// `jacobian` is empty, otherwise parsed and spot-checked against
    /// finite differences.
    static Model from_parts(std::string name, std::vector<std::string> states,
                            std::vector<std::string> f,
                            std::vector<std::vector<std::string>> jacobian, Partition partition,
                            std::vector<NormSpec> norms,  // empty => unweighted Two everywhere
                            std::optional<IntervalBox> invariant_box,
                            std::optional<std::vector<double>> vf_bounds, bool trust_vf_bounds,
                            std::vector<GainOverride> overrides);

    const std::string& name() const { return name_; }
    const std::vector<std::string>& states() const { return states_; }
    std::size_t dim() const { return states_.size(); }
    std::size_t block_count() const { return partition_.block_count(); }

    const std::vector<Expr>& f() const { return f_; }
    const Expr& jacobian(std::size_t row, std::size_t col) const {
        return jac_[row * dim() + col];
    }
    const Partition& partition() const { return partition_; }
    const NormSpec& norm(std::size_t block) const { return norms_[block]; }
    const std::vector<NormSpec>& norms() const { return norms_; }

    const std::optional<IntervalBox>& invariant_box() const { return invariant_box_; }
    const std::optional<std::vector<double>>& stored_vf_bounds() const { return vf_bounds_; }
    bool trusts_vf_bounds() const { return trust_vf_bounds_; }
    const std::vector<GainOverride>& gain_overrides() const { return overrides_; }

    /// True when no f entry references the time symbol.
    bool autonomous() const { return autonomous_; }

    /// Symbolic symmetric part (J_uv + J_vu)/2 of diagonal block `i`,
    /// simplified; exact cancellations here are what make skew blocks
    /// report a zero measure bound.
    const Expr& sym_jacobian(std::size_t block, std::size_t u, std::size_t v) const;

    /// Per-block bounds M_i on |f_i| over the invariant box: the stored
    /// values when present, otherwise derived by interval evaluation.
    /// Throws ModelError when neither stored bounds nor a box exist.
    std::vector<double> vf_bounds(const Interval& t_range) const;

    /// Interval-evaluate |f_i| per block over the invariant box and check
    /// the stored bounds; throws ModelError with the offending block and
    /// interval evidence. No-op when bounds are trusted or absent.
    void validate_vf_bounds(const Interval& t_range) const;

    /// Return a copy with a different partition and per-block norms
    /// (used by partition comparison and CLI overrides). Blocks equal to
    /// one of this model's blocks keep their NormSpec; new blocks get
    /// unweighted Two.
    Model with_partition(Partition p) const;

    /// Return a copy with the given per-block norms installed.
    Model with_norms(std::vector<NormSpec> norms) const;

  private:
    Model() = default;
    void finalize();  // derive sym parts, autonomous flag; validate overrides

    std::string name_;
    std::vector<std::string> states_;
    std::vector<Expr> f_;
    std::vector<Expr> jac_;  // row-major n*n
    Partition partition_;
    std::vector<NormSpec> norms_;
    std::optional<IntervalBox> invariant_box_;
    std::optional<std::vector<double>> vf_bounds_;
    bool trust_vf_bounds_ = false;
    std::vector<GainOverride> overrides_;
    bool autonomous_ = true;
    std::vector<std::vector<Expr>> sym_jac_;  // per block, row-major n_i*n_i
};

/// Load a model document from a file path.
Model load_model(const std::string& path);

/// Load a model document from JSON text.
Model load_model_text(const std::string& text);

/// The n_i x n_j sub-matrix of symbolic Jacobian entries for block pair (i, j).
std::vector<std::vector<Expr>> block_jacobian(const Model& m, std::size_t i, std::size_t j);

}  // namespace reach
