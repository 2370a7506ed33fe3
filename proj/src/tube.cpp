#include "reach/tube.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reach/parallel.hpp"
#include "reach/rng.hpp"
#include "reach/sim.hpp"

namespace reach {

ReachTube reach_tube(const Model& m, const std::vector<double>& x0,
                     const std::vector<double>& eps, double t_final, int steps) {
    const std::size_t k = m.block_count();
    if (eps.size() != k) throw ModelError("eps must have one radius per partition block");
    for (double e : eps)
        if (!(e >= 0.0) || !std::isfinite(e)) throw ModelError("eps entries must be finite and >= 0");
    if (!(t_final > 0.0)) throw ModelError("t_final must be positive");
    if (steps < 1) throw ModelError("steps must be >= 1");

    const Interval horizon(0.0, t_final);
    m.validate_vf_bounds(horizon);
    const std::vector<double> vf_bounds = m.vf_bounds(horizon);

    ReachTube tube;
    tube.model_name = m.name();
    tube.settings.t_final = t_final;
    tube.settings.steps = steps;
    tube.settings.x0 = x0;
    tube.settings.eps = eps;
    tube.vf_bounds_used = vf_bounds;

    const Trajectory traj = simulate(m, x0, t_final, steps, tube.settings.substeps);
    tube.times = traj.times;
    tube.balls.reserve(traj.size());
    tube.balls.push_back(Ball{traj.points[0], eps});

    for (int l = 0; l < steps; ++l) {
        const double dt = traj.times[l + 1] - traj.times[l];
        const Ball& current = tube.balls.back();

        const IntervalBox coarse = coarse_domain(m, current, vf_bounds, dt);
        if (m.invariant_box() && !tube.escape_step) {
            for (std::size_t c = 0; c < coarse.size(); ++c) {
                if (!(*m.invariant_box())[c].contains(coarse[c])) {
                    tube.escape_step = l;
                    break;
                }
            }
        }

        auto [gain, evidence] = gain_matrix(m, coarse, Interval(traj.times[l], traj.times[l + 1]));
        Ball next = propagate_ball(current, gain, dt);
        next.center = traj.points[l + 1];

        tube.coarse.push_back(coarse);
        tube.evidence.push_back(std::move(evidence));
        tube.balls.push_back(std::move(next));
    }
    return tube;
}

// ---------------------------------------------------------------------------
// Partition comparison
// ---------------------------------------------------------------------------

std::vector<PartitionComparisonRow> compare_partitions(const Model& m,
                                                       const std::vector<double>& x0,
                                                       const std::vector<double>& eps,
                                                       double t_final, int steps,
                                                       const std::vector<Partition>& partitions) {
    if (eps.size() != m.block_count())
        throw ModelError("eps must match the model's native partition");

    // Spread the native per-block radii onto coordinates.
    std::vector<double> coord_radius(m.dim(), 0.0);
    for (std::size_t b = 0; b < m.block_count(); ++b)
        for (std::size_t idx : m.partition().blocks[b]) coord_radius[idx] = eps[b];

    std::vector<PartitionComparisonRow> rows;
    rows.reserve(partitions.size());
    for (const Partition& p : partitions) {
        const Model variant = m.with_partition(p);
        PartitionComparisonRow row;
        row.partition = p;
        row.block_eps.reserve(p.block_count());
        for (const auto& blk : p.blocks) {
            double r = 0.0;
            for (std::size_t idx : blk) r = std::fmax(r, coord_radius[idx]);
            row.block_eps.push_back(r);
        }
        const ReachTube tube = reach_tube(variant, x0, row.block_eps, t_final, steps);
        row.final_radii = tube.balls.back().radii;

        const IntervalBox final_box = ball_to_box(variant, tube.balls.back());
        row.coord_halfwidths.reserve(final_box.size());
        row.box_volume = 1.0;
        for (const Interval& iv : final_box) {
            row.coord_halfwidths.push_back(0.5 * iv.width());
            row.box_volume *= iv.width();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Monte Carlo validation
// ---------------------------------------------------------------------------

namespace {

// Uniform draw from the unit ball of `norm` in dimension nb (unweighted
// geometry); the weighted case maps through the inverse weight afterwards.
std::vector<double> unit_ball_sample(Rng& rng, NormKind kind, std::size_t nb) {
    std::vector<double> y(nb, 0.0);
    const double radius = std::pow(rng.uniform01(), 1.0 / static_cast<double>(nb));
    switch (kind) {
        case NormKind::Inf: {
            for (double& v : y) v = rng.uniform(-1.0, 1.0);
            return y;
        }
        case NormKind::Two: {
            double norm2 = 0.0;
            do {
                norm2 = 0.0;
                for (double& v : y) {
                    v = rng.normal();
                    norm2 += v * v;
                }
            } while (norm2 == 0.0);
            const double scale = radius / std::sqrt(norm2);
            for (double& v : y) v *= scale;
            return y;
        }
        case NormKind::One: {
            double sum = 0.0;
            for (double& v : y) {
                v = rng.exponential();
                sum += v;
            }
            for (double& v : y) {
                const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
                v = sign * v / sum * radius;
            }
            return y;
        }
    }
    return y;
}

std::vector<double> draw_initial_state(Rng& rng, const Model& m, const Ball& ball) {
    std::vector<double> x = ball.center;
    for (std::size_t b = 0; b < m.block_count(); ++b) {
        const auto& idx = m.partition().blocks[b];
        const NormSpec& norm = m.norm(b);
        std::vector<double> y = unit_ball_sample(rng, norm.kind(), idx.size());
        if (norm.weighted()) y = norm.weight_inverse() * y;
        for (std::size_t j = 0; j < idx.size(); ++j) x[idx[j]] += ball.radii[b] * y[j];
    }
    return x;
}

struct SampleOutcome {
    bool blowup = false;
    bool violation = false;
    double max_ratio = 0.0;
    std::vector<double> per_block_max;
};

SampleOutcome evaluate_sample(const Model& m, const ReachTube& tube, std::uint64_t seed,
                              std::size_t sample_index) {
    const std::size_t k = m.block_count();
    SampleOutcome out;
    out.per_block_max.assign(k, 0.0);

    std::vector<double> z0;
    if (sample_index == 0) {
        z0 = tube.balls[0].center;  // the anchor sample
    } else {
        Rng rng = Rng::stream(seed, sample_index);
        z0 = draw_initial_state(rng, m, tube.balls[0]);
    }

    Trajectory traj;
    try {
        traj = simulate(m, z0, tube.settings.t_final, tube.settings.steps, tube.settings.substeps);
    } catch (const SimError&) {
        out.blowup = true;
        return out;
    }

    std::vector<double> diff;
    for (std::size_t l = 0; l < traj.size(); ++l) {
        for (std::size_t b = 0; b < k; ++b) {
            const auto& idx = m.partition().blocks[b];
            diff.resize(idx.size());
            for (std::size_t j = 0; j < idx.size(); ++j)
                diff[j] = traj.points[l][idx[j]] - tube.balls[l].center[idx[j]];
            const double dist = m.norm(b).vector_norm(diff);
            const double delta = tube.balls[l].radii[b];
            double ratio;
            if (delta > 0.0) {
                ratio = dist / delta;
            } else {
                ratio = dist == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
            }
            out.per_block_max[b] = std::fmax(out.per_block_max[b], ratio);
            out.max_ratio = std::fmax(out.max_ratio, ratio);
        }
    }
    out.violation = out.max_ratio > 1.0;
    return out;
}

ValidationReport merge_outcomes(const Model& m, const ReachTube& tube,
                                const std::vector<SampleOutcome>& outcomes, std::uint64_t seed) {
    ValidationReport report;
    report.samples = outcomes.size();
    report.seed = seed;
    report.per_block_max_ratio.assign(m.block_count(), 0.0);
    for (std::size_t s = 0; s < outcomes.size(); ++s) {
        const SampleOutcome& o = outcomes[s];
        if (o.blowup) {
            ++report.blowups;
            report.blowup_samples.push_back(s);
            continue;
        }
        if (o.violation) {
            ++report.violations;
            report.violating_samples.push_back(s);
        }
        report.max_ratio = std::fmax(report.max_ratio, o.max_ratio);
        for (std::size_t b = 0; b < m.block_count(); ++b)
            report.per_block_max_ratio[b] =
                std::fmax(report.per_block_max_ratio[b], o.per_block_max[b]);
    }

    // Center drift: the tube's centers against a double-resolution run.
    const Trajectory fine = simulate(m, tube.settings.x0, tube.settings.t_final,
                                     tube.settings.steps, 2 * tube.settings.substeps);
    report.center_drift.assign(m.block_count(), 0.0);
    std::vector<double> diff;
    for (std::size_t l = 0; l < fine.size(); ++l) {
        for (std::size_t b = 0; b < m.block_count(); ++b) {
            const auto& idx = m.partition().blocks[b];
            diff.resize(idx.size());
            for (std::size_t j = 0; j < idx.size(); ++j)
                diff[j] = fine.points[l][idx[j]] - tube.balls[l].center[idx[j]];
            report.center_drift[b] = std::fmax(report.center_drift[b], m.norm(b).vector_norm(diff));
        }
    }
    return report;
}

void check_tube_model(const Model& m, const ReachTube& tube, std::size_t samples) {
    if (samples < 1) throw ModelError("validation needs samples >= 1");
    if (tube.model_name != m.name())
        throw ModelError("tube was computed for model \"" + tube.model_name +
                         "\", not \"" + m.name() + "\"");
    if (tube.balls.empty() || tube.balls[0].center.size() != m.dim() ||
        tube.balls[0].radii.size() != m.block_count())
        throw ModelError("tube dimensions do not match the model");
}

}  // namespace

ValidationReport validate_tube_serial(const Model& m, const ReachTube& tube, std::size_t samples,
                                      std::uint64_t seed) {
    check_tube_model(m, tube, samples);
    std::vector<SampleOutcome> outcomes(samples);
    for (std::size_t s = 0; s < samples; ++s) outcomes[s] = evaluate_sample(m, tube, seed, s);
    return merge_outcomes(m, tube, outcomes, seed);
}

ValidationReport validate_tube(const Model& m, const ReachTube& tube, std::size_t samples,
                               std::uint64_t seed, int threads) {
    check_tube_model(m, tube, samples);
    const int pool = resolve_thread_count(threads);
    std::vector<SampleOutcome> outcomes(samples);
#pragma omp parallel for schedule(dynamic, 8) num_threads(pool)
    for (long long s = 0; s < static_cast<long long>(samples); ++s)
        outcomes[static_cast<std::size_t>(s)] =
            evaluate_sample(m, tube, seed, static_cast<std::size_t>(s));
    return merge_outcomes(m, tube, outcomes, seed);
}

}  // namespace reach
