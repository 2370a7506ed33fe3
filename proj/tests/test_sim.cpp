#include <doctest.h>

#include <cmath>

#include "reach/model.hpp"
#include "reach/sim.hpp"

using namespace reach;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Model oscillator() {
    return Model::from_parts("osc", {"p", "q", "w"}, {"w*q", "-w*p", "0"}, {},
                             Partition{{{0, 1}, {2}}}, {}, std::nullopt, std::nullopt, false, {});
}

// Closed form for p' = w q, q' = -w p.
std::pair<double, double> closed_form(double p0, double q0, double w, double t) {
    return {p0 * std::cos(w * t) + q0 * std::sin(w * t),
            -p0 * std::sin(w * t) + q0 * std::cos(w * t)};
}

double final_error(int steps) {
    const Model m = oscillator();
    const Trajectory traj = simulate(m, {1.0, 0.0, 1.0}, kTwoPi, steps);
    const auto [p, q] = closed_form(1.0, 0.0, 1.0, kTwoPi);
    const auto& last = traj.points.back();
    return std::hypot(last[0] - p, last[1] - q);
}

}  // namespace

TEST_CASE("oscillator returns to its start after one period") {
    const Model m = oscillator();
    const Trajectory traj = simulate(m, {1.0, 0.0, 1.0}, kTwoPi, 100);
    REQUIRE(traj.size() == 101);
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == doctest::Approx(kTwoPi));
    CHECK(std::fabs(traj.points.back()[0] - 1.0) <= 1e-6);
    CHECK(std::fabs(traj.points.back()[1] - 0.0) <= 1e-6);
    CHECK(traj.points.back()[2] == 1.0);  // w' = 0 stays bit-exact
}

TEST_CASE("constant dynamics give a constant trajectory") {
    const Model m = Model::from_parts("const", {"a", "b"}, {"0", "0"}, {}, Partition{{{0, 1}}},
                                      {}, std::nullopt, std::nullopt, false, {});
    const Trajectory traj = simulate(m, {0.25, -4.0}, 5.0, 20);
    for (const auto& pt : traj.points) {
        CHECK(pt[0] == 0.25);
        CHECK(pt[1] == -4.0);
    }
}

TEST_CASE("linear decay hits the closed form") {
    const Model m = Model::from_parts("decay", {"x1"}, {"-x1"}, {}, Partition{{{0}}}, {},
                                      std::nullopt, std::nullopt, false, {});
    const Trajectory traj = simulate(m, {1.0}, 1.0, 100);
    CHECK(std::fabs(traj.points.back()[0] - std::exp(-1.0)) <= 1e-8);
}

TEST_CASE("fourth-order convergence") {
    // Halving the step shrinks the error by roughly 2^4.
    const double e1 = final_error(25);
    const double e2 = final_error(50);
    const double ratio = e1 / e2;
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
}

TEST_CASE("energy conservation over a long horizon") {
    const Model m = oscillator();
    const Trajectory traj = simulate(m, {1.0, 0.0, 1.0}, 10.0, 200);
    for (const auto& pt : traj.points) {
        const double energy = pt[0] * pt[0] + pt[1] * pt[1];
        CHECK(std::fabs(energy - 1.0) <= 1e-8);
    }
}

TEST_CASE("deterministic repeatability") {
    const Model m = oscillator();
    const Trajectory a = simulate(m, {0.3, 0.4, 1.01}, 3.0, 50);
    const Trajectory b = simulate(m, {0.3, 0.4, 1.01}, 3.0, 50);
    REQUIRE(a.size() == b.size());
    for (std::size_t l = 0; l < a.size(); ++l) {
        CHECK(a.times[l] == b.times[l]);
        CHECK(a.points[l] == b.points[l]);
    }
}

TEST_CASE("blow-up reports the failure time") {
    const Model m = Model::from_parts("explode", {"x1"}, {"x1^2"}, {}, Partition{{{0}}}, {},
                                      std::nullopt, std::nullopt, false, {});
    try {
        simulate(m, {10.0}, 10.0, 100);
        FAIL("expected SimError");
    } catch (const SimError& e) {
        CHECK(e.time > 0.0);
        CHECK(e.time <= 10.0);
    }
}

TEST_CASE("input validation") {
    const Model m = oscillator();
    CHECK_THROWS_AS(simulate(m, {1.0}, 1.0, 10), SimError);          // wrong dimension
    CHECK_THROWS_AS(simulate(m, {1.0, 0.0, 1.0}, -1.0, 10), SimError);
    CHECK_THROWS_AS(simulate(m, {1.0, 0.0, 1.0}, 1.0, 0), SimError);
}

TEST_CASE("time-varying fields see the time symbol") {
    const Model m = Model::from_parts("driven", {"x1"}, {"cos(t)"}, {}, Partition{{{0}}}, {},
                                      std::nullopt, std::nullopt, false, {});
    CHECK(!m.autonomous());
    const Trajectory traj = simulate(m, {0.0}, 1.0, 100);
    CHECK(std::fabs(traj.points.back()[0] - std::sin(1.0)) <= 1e-8);
}
