#include "reach/contraction.hpp"

#include <cmath>

namespace reach {

namespace {

// Enumeration limits for the exact-supremum bounds; above these the cheaper
// envelope bounds are used (see interval_matrix.hpp).
constexpr std::size_t kHertzDimCap = 8;
constexpr std::size_t kNormVertexCap = 10;

// Per-coordinate half-width scale of a unit ball of the block norm:
// coordinate j of {|x|_block <= r} lies within r * scale_j of the center.
std::vector<double> coordinate_scales(const Model& m, std::size_t block) {
    const NormSpec& norm = m.norm(block);
    const std::size_t nb = m.partition().block_size(block);
    std::vector<double> s(nb, 1.0);
    if (!norm.weighted()) return s;
    if (norm.kind() == NormKind::One || norm.kind() == NormKind::Inf) {
        for (std::size_t j = 0; j < nb; ++j)
            s[j] = (Interval::point(1.0) / Interval::point(norm.weight()(j, j))).hi;
        return s;
    }
    // Weighted Two: |P(x-c)|_2 <= r implies |x_j - c_j| <= r * ||row j of P^-1||_2.
    const IntervalMatrix pinv = inverse_enclosure(norm.weight());
    for (std::size_t j = 0; j < nb; ++j) {
        Interval acc = Interval::point(0.0);
        for (std::size_t c = 0; c < nb; ++c) acc = acc + pinv(j, c) * pinv(j, c);
        s[j] = iv_sqrt(acc).hi;
    }
    return s;
}

}  // namespace

IntervalBox ball_to_box(const Model& m, const Ball& b) {
    const std::size_t n = m.dim();
    if (b.center.size() != n) throw ModelError("ball center dimension mismatch");
    if (b.radii.size() != m.block_count()) throw ModelError("ball radii dimension mismatch");
    IntervalBox box(n, Interval::point(0.0));
    for (std::size_t blk = 0; blk < m.block_count(); ++blk) {
        const double r = b.radii[blk];
        if (!(r >= 0.0) || !std::isfinite(r)) throw ModelError("ball radius must be finite and >= 0");
        const std::vector<double> scales = coordinate_scales(m, blk);
        const auto& idx = m.partition().blocks[blk];
        for (std::size_t j = 0; j < idx.size(); ++j) {
            if (r == 0.0) {
                box[idx[j]] = Interval::point(b.center[idx[j]]);
            } else {
                const Interval half = Interval::point(r) * Interval::point(scales[j]);
                box[idx[j]] = Interval::point(b.center[idx[j]]) + Interval(-half.hi, half.hi);
            }
        }
    }
    return box;
}

IntervalMatrix interval_block_jacobian(const Model& m, std::size_t i, std::size_t j,
                                       const IntervalBox& domain, const Interval& t_range) {
    const auto& rows = m.partition().blocks[i];
    const auto& cols = m.partition().blocks[j];
    IntervalMatrix out(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            out(r, c) = eval_interval(m.jacobian(rows[r], cols[c]), domain, t_range);
    return out;
}

IntervalMatrix interval_sym_block(const Model& m, std::size_t i, const IntervalBox& domain,
                                  const Interval& t_range) {
    const std::size_t nb = m.partition().block_size(i);
    IntervalMatrix out(nb, nb);
    for (std::size_t u = 0; u < nb; ++u)
        for (std::size_t v = 0; v < nb; ++v)
            out(u, v) = eval_interval(m.sym_jacobian(i, u, v), domain, t_range);
    return out;
}

namespace {

IntervalMatrix diag_weight_inverse(const Matrix& w) {
    IntervalMatrix inv(w.rows(), w.cols());
    for (std::size_t i = 0; i < w.rows(); ++i)
        inv(i, i) = Interval::point(1.0) / Interval::point(w(i, i));
    return inv;
}

// Weighted interval transform W * [A] * W^-1 (row weight i, column weight j).
IntervalMatrix apply_weights(const IntervalMatrix& a, const NormSpec& norm_i,
                             const NormSpec& norm_j) {
    IntervalMatrix b = a;
    if (norm_i.weighted()) b = IntervalMatrix::from_point(norm_i.weight()) * b;
    if (norm_j.weighted()) {
        if (norm_j.kind() == NormKind::Two)
            b = b * inverse_enclosure(norm_j.weight());
        else
            b = b * diag_weight_inverse(norm_j.weight());
    }
    return b;
}

double diagonal_bound(const Model& m, std::size_t i, const IntervalBox& domain,
                      const Interval& t_range, IntervalMatrix* enclosure_out) {
    const NormSpec& norm = m.norm(i);
    if (norm.kind() == NormKind::Two) {
        if (!norm.weighted()) {
            // Direct route through the symbolic symmetric part: exact
            // cancellations survive into the interval enclosure.
            const IntervalMatrix s = interval_sym_block(m, i, domain, t_range);
            *enclosure_out = s;
            return iv_sym_lambda_max_sup(s, kHertzDimCap);
        }
        const IntervalMatrix j = interval_block_jacobian(m, i, i, domain, t_range);
        const IntervalMatrix b = apply_weights(j, norm, norm);
        *enclosure_out = b;
        return iv_measure_bound(b, NormKind::Two, kHertzDimCap);
    }
    IntervalMatrix j = interval_block_jacobian(m, i, i, domain, t_range);
    if (norm.weighted()) j = apply_weights(j, norm, norm);
    *enclosure_out = j;
    return iv_measure_bound(j, norm.kind(), kHertzDimCap);
}

double offdiagonal_bound(const Model& m, std::size_t i, std::size_t j, const IntervalBox& domain,
                         const Interval& t_range, IntervalMatrix* enclosure_out) {
    const NormSpec& ni = m.norm(i);
    const NormSpec& nj = m.norm(j);
    if (ni.kind() != nj.kind())
        throw ModelError(
            "cross-block bounds need matching norm kinds on blocks " + std::to_string(i) + " and " +
            std::to_string(j) + "; mixed kinds have no exact closed form here");
    IntervalMatrix a = interval_block_jacobian(m, i, j, domain, t_range);
    if (ni.weighted() || nj.weighted()) a = apply_weights(a, ni, nj);
    *enclosure_out = a;
    return iv_norm_bound(a, ni.kind(), kNormVertexCap);
}

}  // namespace

std::pair<GainMatrix, BoundEvidence> gain_matrix(const Model& m, const IntervalBox& domain,
                                                 const Interval& t_range) {
    if (domain.size() != m.dim()) throw ModelError("domain dimension does not match the model");

    IntervalBox box = domain;
    if (m.invariant_box()) {
        for (std::size_t c = 0; c < box.size(); ++c) {
            try {
                box[c] = intersect(box[c], (*m.invariant_box())[c]);
            } catch (const DomainError&) {
                throw ModelError("domain does not intersect the invariant box on state " +
                                 std::to_string(c));
            }
        }
    }

    const std::size_t k = m.block_count();
    BoundEvidence evidence;
    evidence.domain = box;
    evidence.t_range = t_range;
    evidence.entries.resize(k * k);

    Matrix c(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            EntryEvidence& entry = evidence.entries[i * k + j];
            bool overridden = false;
            for (const GainOverride& o : m.gain_overrides()) {
                if (o.i == i && o.j == j) {
                    entry.user_override = true;
                    entry.bound = o.value;
                    c(i, j) = o.value;
                    overridden = true;
                    break;
                }
            }
            if (overridden) continue;
            entry.bound = (i == j) ? diagonal_bound(m, i, box, t_range, &entry.enclosure)
                                   : offdiagonal_bound(m, i, j, box, t_range, &entry.enclosure);
            c(i, j) = entry.bound;
        }
    }
    return {GainMatrix(std::move(c)), std::move(evidence)};
}

IntervalBox coarse_domain(const Model& m, const Ball& b, const std::vector<double>& vf_bounds,
                          double dt) {
    if (!(dt > 0.0)) throw ModelError("coarse_domain needs dt > 0");
    if (vf_bounds.size() != m.block_count())
        throw ModelError("vf_bounds must have one entry per block");
    Ball inflated = b;
    for (std::size_t i = 0; i < inflated.radii.size(); ++i) {
        if (!(vf_bounds[i] >= 0.0)) throw ModelError("vf_bounds must be >= 0");
        // Round the inflation upward so the enclosure stays sound.
        inflated.radii[i] =
            (Interval::point(b.radii[i]) + Interval::point(vf_bounds[i]) * Interval::point(dt)).hi;
    }
    return ball_to_box(m, inflated);
}

Ball propagate_ball(const Ball& b, const GainMatrix& c, double dt) {
    if (!(dt >= 0.0)) throw ModelError("propagate_ball needs dt >= 0");
    if (b.radii.size() != c.size()) throw ModelError("ball radii do not match gain matrix size");
    const Matrix e = expm(c.matrix(), dt);
    Ball out = b;
    for (std::size_t i = 0; i < c.size(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) acc += e(i, j) * b.radii[j];
        out.radii[i] = acc;
    }
    return out;
}

}  // namespace reach
