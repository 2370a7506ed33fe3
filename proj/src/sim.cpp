#include "reach/sim.hpp"

#include <cmath>

namespace reach {

namespace {

void eval_rhs(const Model& m, double t, const std::vector<double>& x, std::vector<double>& out) {
    const std::size_t n = m.dim();
    for (std::size_t i = 0; i < n; ++i) out[i] = eval(m.f()[i], x, t);
}

}  // namespace

Trajectory simulate(const Model& m, const std::vector<double>& x0, double t_final, int steps,
                    int substeps) {
    const std::size_t n = m.dim();
    if (x0.size() != n) throw SimError("x0 dimension does not match the model", 0.0);
    if (!(t_final > 0.0)) throw SimError("t_final must be positive", 0.0);
    if (steps < 1) throw SimError("steps must be >= 1", 0.0);
    if (substeps < 8) substeps = 8;

    Trajectory traj;
    traj.times.reserve(static_cast<std::size_t>(steps) + 1);
    traj.points.reserve(static_cast<std::size_t>(steps) + 1);
    traj.times.push_back(0.0);
    traj.points.push_back(x0);

    std::vector<double> x = x0;
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

    const double dt_out = t_final / steps;
    const double h = dt_out / substeps;

    for (int l = 0; l < steps; ++l) {
        const double t_base = dt_out * l;
        for (int s = 0; s < substeps; ++s) {
            const double t = t_base + h * s;
            try {
                eval_rhs(m, t, x, k1);
                for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
                eval_rhs(m, t + 0.5 * h, tmp, k2);
                for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
                eval_rhs(m, t + 0.5 * h, tmp, k3);
                for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
                eval_rhs(m, t + h, tmp, k4);
            } catch (const EvalError& e) {
                throw SimError("vector field evaluation failed at t = " + std::to_string(t) +
                                   ": " + e.what(),
                               t);
            }
            for (std::size_t i = 0; i < n; ++i)
                x[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            for (double v : x)
                if (!std::isfinite(v))
                    throw SimError("trajectory blew up at t = " + std::to_string(t + h), t + h);
        }
        traj.times.push_back(dt_out * (l + 1));
        traj.points.push_back(x);
    }
    return traj;
}

}  // namespace reach
