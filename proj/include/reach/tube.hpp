#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reach/contraction.hpp"
#include "reach/model.hpp"

namespace reach {

struct TubeSettings {
    double t_final = 0.0;
    int steps = 0;
    int substeps = 8;
    std::vector<double> x0;
    std::vector<double> eps;
};

/// Time-stamped sequence of balls along a sample trajectory, with the
/// per-step bound evidence and the coarse enclosures used to compute it.
struct ReachTube {
    std::string model_name;
    std::vector<double> times;            // L+1, strictly increasing from 0
    std::vector<Ball> balls;              // L+1; balls[0] is the initial ball
    std::vector<BoundEvidence> evidence;  // L, one per step
    std::vector<IntervalBox> coarse;      // L, coarse enclosure for [t_l, t_{l+1}]
    std::vector<double> vf_bounds_used;   // per-block M
    TubeSettings settings;
    // First step whose coarse enclosure left the invariant box, if any.
    // Bounds stay sound per the computation, but the M bounds are only the
    // user's assertion outside the box.
    std::optional<int> escape_step;

    const std::vector<double>& radii(std::size_t l) const { return balls[l].radii; }
};

/// Algorithm: delta[0] = eps; per step, bound the Jacobian blocks over the
/// coarse enclosure of the step and propagate delta through expm(C dt).
ReachTube reach_tube(const Model& m, const std::vector<double>& x0,
                     const std::vector<double>& eps, double t_final, int steps);

struct PartitionComparisonRow {
    Partition partition;
    std::vector<double> block_eps;         // re-expressed initial radii
    std::vector<double> final_radii;       // per block
    std::vector<double> coord_halfwidths;  // bounding box of the final ball
    double box_volume = 0.0;               // product of box edge lengths
};

/// Run one tube per partition from a common initial set description.
///
/// The model's eps (one radius per native block) is first spread to
/// per-coordinate radii (each coordinate inherits its native block's
/// radius), then recombined per requested block as the max of its
/// coordinate radii. Blocks identical to a native block keep that block's
/// norm, so requesting the native partition reproduces the native tube.
std::vector<PartitionComparisonRow> compare_partitions(const Model& m,
                                                       const std::vector<double>& x0,
                                                       const std::vector<double>& eps,
                                                       double t_final, int steps,
                                                       const std::vector<Partition>& partitions);

struct ValidationReport {
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::size_t violations = 0;
    double max_ratio = 0.0;
    std::vector<double> per_block_max_ratio;
    std::vector<std::size_t> violating_samples;  // ascending
    std::size_t blowups = 0;
    std::vector<std::size_t> blowup_samples;  // ascending
    // Max over output times of the block-norm distance between the tube's
    // centers and a double-resolution re-integration; an estimate of the
    // integrator error the radii do not account for.
    std::vector<double> center_drift;
};

/// Monte Carlo falsification check of tube containment: draw initial states
/// uniformly from the initial ball (sample 0 is the exact center), simulate
/// on the tube's grid, and report the worst per-block ratio
/// |z_i(t_l) - c_i(t_l)| / delta_i[l]. Ratios above 1 are violations.
///
/// Results are keyed by sample index and merged deterministically: the
/// report is identical for any thread count. `threads` <= 0 resolves via
/// REACHTUBE_THREADS / OpenMP.
ValidationReport validate_tube(const Model& m, const ReachTube& tube, std::size_t samples,
                               std::uint64_t seed, int threads = 0);

/// Single-threaded reference implementation with no OpenMP involvement;
/// kept for testing and benchmarking against the parallel path.
ValidationReport validate_tube_serial(const Model& m, const ReachTube& tube, std::size_t samples,
                                      std::uint64_t seed);

// Serialization. The JSON document round-trips (modulo evidence enclosures,
// which are written for audit but not reloaded); CSV and the gnuplot data
// file are write-only views.
void write_tube_json(const ReachTube& tube, const std::string& path);
std::string tube_to_json(const ReachTube& tube);
ReachTube load_tube_json(const std::string& path);
ReachTube tube_from_json(const std::string& text);

/// Flat CSV: t, one column per state center, then radius_1..radius_k.
void write_tube_csv(const ReachTube& tube, const Model& m, const std::string& path);

/// Gnuplot-ready projection: columns t, cx, cy, r where r is the radius of
/// `radius_block` and (cx, cy) are the chosen center coordinates.
void write_tube_gnuplot(const ReachTube& tube, std::size_t coord_x, std::size_t coord_y,
                        std::size_t radius_block, const std::string& path);

}  // namespace reach
