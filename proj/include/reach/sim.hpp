#pragma once

#include <vector>

#include "reach/model.hpp"

namespace reach {

/// Sampled solution: times[l] and the state at each time. times[0] == 0.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> points;

    std::size_t size() const { return times.size(); }
};

/// Classical fixed-step RK4. The trajectory has `steps`+1 output points on
/// the uniform grid over [0, t_final]; each output interval is integrated
/// with `substeps` internal RK4 steps (>= 8). Bit-identical results for
/// identical inputs. Integration error is not added to reach-tube radii;
/// see the README for the soundness caveat and mitigation.
///
/// Throws SimError with the failure time if the state becomes non-finite.
Trajectory simulate(const Model& m, const std::vector<double>& x0, double t_final, int steps,
                    int substeps = 8);

}  // namespace reach
