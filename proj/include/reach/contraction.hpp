#pragma once

#include <utility>
#include <vector>

#include "reach/interval_matrix.hpp"
#include "reach/model.hpp"

namespace reach {

/// Norm ball of a partitioned state: a center point with one radius per
/// partition block, measured in the block's norm.
struct Ball {
    std::vector<double> center;  // dimension n
    std::vector<double> radii;   // dimension k, all >= 0
};

/// Audit trail for one gain-matrix entry: the interval enclosure the bound
/// was computed from (after any weight transform) and the bound itself.
struct EntryEvidence {
    double bound = 0.0;
    bool user_override = false;
    IntervalMatrix enclosure;  // empty for overridden entries
};

/// Everything needed to reproduce a gain matrix: the (intersected) domain
/// box, the time range, and per-block-pair enclosures.
struct BoundEvidence {
    IntervalBox domain;
    Interval t_range = Interval::point(0.0);
    std::vector<EntryEvidence> entries;  // row-major k*k

    const EntryEvidence& at(std::size_t i, std::size_t j, std::size_t k) const {
        return entries[i * k + j];
    }
};

/// Smallest axis-aligned box containing the ball. Exact per coordinate for
/// Inf-norm blocks; for One/Two blocks the same per-coordinate bound is a
/// sound (possibly strict) enclosure since |.|_inf <= |.|_1 and
/// |.|_inf <= |.|_2.
IntervalBox ball_to_box(const Model& m, const Ball& b);

/// Interval enclosure of Jacobian block (i, j) over domain x t_range.
IntervalMatrix interval_block_jacobian(const Model& m, std::size_t i, std::size_t j,
                                       const IntervalBox& domain, const Interval& t_range);

/// Interval enclosure of the symbolic symmetric part of diagonal block i.
/// Symbolic cancellation happens before interval evaluation, so skew
/// structure yields exact zeros.
IntervalMatrix interval_sym_block(const Model& m, std::size_t i, const IntervalBox& domain,
                                  const Interval& t_range);

/// Gain matrix over a domain: C_ii bounds the measure of J_ii and C_ij
/// (i != j) bounds the mixed norm of J_ij, both guaranteed over
/// domain x t_range (intersected with the model's invariant box first).
/// User-supplied overrides from the model replace computed entries and are
/// flagged in the evidence.
std::pair<GainMatrix, BoundEvidence> gain_matrix(const Model& m, const IntervalBox& domain,
                                                 const Interval& t_range);

/// Box enclosure of the ball inflated by M_i * dt per block (the per-step
/// coarse reachable-set enclosure).
IntervalBox coarse_domain(const Model& m, const Ball& b, const std::vector<double>& vf_bounds,
                          double dt);

/// Propagate radii through one step: delta = expm(C * dt) * eps. The center
/// is left unchanged; the caller installs the simulated center.
Ball propagate_ball(const Ball& b, const GainMatrix& c, double dt);

}  // namespace reach
