#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "random_models.hpp"
#include "reach/contraction.hpp"
#include "reach/linalg.hpp"
#include "reach/sim.hpp"

using namespace reach;

namespace {

Model oscillator(double w_lo = 0.98, double w_hi = 1.02) {
    IntervalBox box = {Interval(-2.0, 2.0), Interval(-2.0, 2.0), Interval(w_lo, w_hi)};
    return Model::from_parts("osc", {"p", "q", "w"}, {"w*q", "-w*p", "0"}, {},
                             Partition{{{0, 1}, {2}}}, {}, box, std::nullopt, false, {});
}

Matrix point_jacobian(const Model& m, const std::vector<double>& x, double t,
                      const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
    Matrix out(rows.size(), cols.size());
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c)
            out(r, c) = eval(m.jacobian(rows[r], cols[c]), x, t);
    return out;
}

}  // namespace

TEST_CASE("ball_to_box") {
    const Model m = oscillator();
    SUBCASE("euclidean disc gets its bounding square") {
        const Ball b{{1.0, 0.0, 1.0}, {0.1, 0.02}};
        const IntervalBox box = ball_to_box(m, b);
        CHECK(box[0].lo == doctest::Approx(0.9).epsilon(1e-14));
        CHECK(box[0].hi == doctest::Approx(1.1).epsilon(1e-14));
        CHECK(box[1].lo == doctest::Approx(-0.1).epsilon(1e-14));
        CHECK(box[1].hi == doctest::Approx(0.1).epsilon(1e-14));
        CHECK(box[2].lo == doctest::Approx(0.98).epsilon(1e-14));
        // Sound: never smaller than the true bounding box.
        CHECK(box[0].lo <= 0.9);
        CHECK(box[0].hi >= 1.1);
    }
    SUBCASE("zero radius degenerates to a point") {
        const Ball b{{0.5, -0.5, 1.0}, {0.0, 0.0}};
        const IntervalBox box = ball_to_box(m, b);
        for (std::size_t c = 0; c < 3; ++c) CHECK(box[c].is_point());
    }
    SUBCASE("weighted Two ball: ellipse extent per coordinate") {
        Matrix p(2, 2);
        p(0, 0) = 2.0;
        p(1, 1) = 1.0;
        const Model wm = Model::from_parts(
            "wosc", {"x1", "x2"}, {"-x1", "-x2"}, {}, Partition{{{0, 1}}},
            {NormSpec(NormKind::Two, p)}, std::nullopt, std::nullopt, false, {});
        const Ball b{{0.0, 0.0}, {1.0}};
        const IntervalBox box = ball_to_box(wm, b);
        CHECK(box[0].hi == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(box[1].hi == doctest::Approx(1.0).epsilon(1e-9));
        // Brute-force sampling of {|Px|_2 <= 1} stays inside.
        Rng rng(17);
        for (int s = 0; s < 2000; ++s) {
            double y1 = rng.normal(), y2 = rng.normal();
            const double norm = std::hypot(y1, y2);
            if (norm == 0.0) continue;
            const double r = std::sqrt(rng.uniform01());
            y1 *= r / norm;
            y2 *= r / norm;
            // x = P^-1 y
            CHECK(box[0].contains(y1 / 2.0));
            CHECK(box[1].contains(y2));
        }
    }
}

TEST_CASE("interval matrix enclosures") {
    SUBCASE("inverse enclosure contains a verified inverse") {
        Rng rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            Matrix p(3, 3);
            for (std::size_t r = 0; r < 3; ++r)
                for (std::size_t c = 0; c < 3; ++c) p(r, c) = rng.uniform(-1.0, 1.0);
            for (std::size_t d = 0; d < 3; ++d) p(d, d) += 3.0;  // diagonally dominant
            const IntervalMatrix inv = inverse_enclosure(p);
            // P * enclosure must contain the identity.
            const IntervalMatrix prod = IntervalMatrix::from_point(p) * inv;
            for (std::size_t r = 0; r < 3; ++r)
                for (std::size_t c = 0; c < 3; ++c)
                    CHECK(prod(r, c).contains(r == c ? 1.0 : 0.0));
        }
    }
    SUBCASE("symmetric lambda_max supremum dominates samples and is exact when degenerate") {
        Rng rng(4);
        for (int trial = 0; trial < 30; ++trial) {
            const std::size_t n = 2 + rng.next_u64() % 3;
            IntervalMatrix s(n, n);
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t c = r; c < n; ++c) {
                    const double mid = rng.uniform(-1.0, 1.0);
                    const double rad = rng.uniform(0.0, 0.5);
                    s(r, c) = Interval(mid - rad, mid + rad);
                    s(c, r) = s(r, c);
                }
            }
            const double sup = iv_sym_lambda_max_sup(s);
            for (int sample = 0; sample < 100; ++sample) {
                Matrix a(n, n);
                for (std::size_t r = 0; r < n; ++r)
                    for (std::size_t c = r; c < n; ++c) {
                        a(r, c) = rng.uniform(s(r, c).lo, s(r, c).hi);
                        a(c, r) = a(r, c);
                    }
                CHECK(sym_eig_max(a) <= sup + 1e-12);
            }
            const IntervalMatrix degen = IntervalMatrix::from_point(s.mid());
            CHECK(iv_sym_lambda_max_sup(degen) ==
                  doctest::Approx(sym_eig_max(s.mid())).epsilon(1e-14));
        }
    }
    SUBCASE("norm bound dominates samples, exactly sup for One/Inf") {
        Rng rng(6);
        for (int trial = 0; trial < 30; ++trial) {
            IntervalMatrix a(2, 3);
            for (std::size_t r = 0; r < 2; ++r)
                for (std::size_t c = 0; c < 3; ++c) {
                    const double mid = rng.uniform(-1.0, 1.0);
                    const double rad = rng.uniform(0.0, 0.5);
                    a(r, c) = Interval(mid - rad, mid + rad);
                }
            for (const NormKind k : {NormKind::One, NormKind::Two, NormKind::Inf}) {
                const double bound = iv_norm_bound(a, k);
                double seen = 0.0;
                for (int sample = 0; sample < 200; ++sample) {
                    Matrix pt(2, 3);
                    for (std::size_t r = 0; r < 2; ++r)
                        for (std::size_t c = 0; c < 3; ++c)
                            pt(r, c) = rng.uniform(a(r, c).lo, a(r, c).hi);
                    seen = std::fmax(seen, matrix_norm(pt, NormSpec(k)));
                    CHECK(matrix_norm(pt, NormSpec(k)) <= bound + 1e-12);
                }
                CHECK(bound <= seen * 1.6 + 1e-9);  // not uselessly loose
            }
        }
    }
}

TEST_CASE("gain matrix on the oscillator") {
    const Model m = oscillator();
    // Box enclosing the disc sqrt(p^2+q^2) <= 2 corner-to-corner.
    const double half = std::sqrt(2.0);
    IntervalBox domain = {Interval(-half, half), Interval(-half, half), Interval(0.98, 1.02)};
    const auto [gain, evidence] = gain_matrix(m, domain, Interval::point(0.0));

    CHECK(gain(0, 0) == 0.0);  // skew symmetry cancels symbolically
    CHECK(gain(1, 0) == 0.0);
    CHECK(gain(1, 1) == 0.0);
    CHECK(gain(0, 1) >= 2.0);                       // covers the disc radius
    CHECK(gain(0, 1) <= 2.0 * (1.0 + 1e-12));       // exact sup over the box

    // Grid-sample oracle of ||J12|| = sqrt(p^2 + q^2) over the box.
    const auto [lo, hi] = oracles::sampled_range(
        resolve(parse("sqrt(p^2 + q^2)"), m.states()), domain, Interval::point(0.0), 9);
    CHECK(gain(0, 1) >= hi - 1e-9);
    CHECK(evidence.at(0, 1, 2).bound == gain(0, 1));
    CHECK(!evidence.at(0, 1, 2).user_override);
}

TEST_CASE("gain matrix basics") {
    SUBCASE("constant jacobian is exact") {
        const Model m = Model::from_parts("decay", {"x1"}, {"-x1"}, {}, Partition{{{0}}}, {},
                                          IntervalBox{Interval(-2.0, 2.0)}, std::nullopt, false,
                                          {});
        const auto [gain, ev] = gain_matrix(m, {Interval(-1.0, 1.0)}, Interval::point(0.0));
        CHECK(gain(0, 0) == -1.0);
    }
    SUBCASE("linear system blocks match linalg on the constant matrix") {
        // x' = A x with a 2+1 block split.
        const Model m = Model::from_parts(
            "lin", {"x1", "x2", "x3"},
            {"-1.5*x1 + 0.5*x2 + 0.25*x3", "-0.5*x1 - 1.0*x2 - 0.75*x3", "0.3*x1 - 2.0*x3"}, {},
            Partition{{{0, 1}, {2}}}, {}, std::nullopt, std::nullopt, false, {});
        IntervalBox domain(3, Interval(-1.0, 1.0));
        const auto [gain, ev] = gain_matrix(m, domain, Interval::point(0.0));

        const Matrix a11{{-1.5, 0.5}, {-0.5, -1.0}};
        const Matrix a12{{0.25}, {-0.75}};
        const Matrix a21{{0.3, 0.0}};
        const Matrix a22{{-2.0}};
        const NormSpec two(NormKind::Two);
        CHECK(gain(0, 0) == doctest::Approx(matrix_measure(a11, two)).epsilon(1e-12));
        CHECK(gain(0, 1) == doctest::Approx(mixed_norm(a12, two, two)).epsilon(1e-12));
        CHECK(gain(1, 0) == doctest::Approx(mixed_norm(a21, two, two)).epsilon(1e-12));
        CHECK(gain(1, 1) == doctest::Approx(matrix_measure(a22, two)).epsilon(1e-12));
    }
    SUBCASE("empty intersection with the invariant box is an error") {
        const Model m = oscillator();
        IntervalBox off = {Interval(5.0, 6.0), Interval(0.0, 1.0), Interval(1.0, 1.0)};
        CHECK_THROWS_AS(gain_matrix(m, off, Interval::point(0.0)), ModelError);
    }
    SUBCASE("mismatched norm kinds across blocks are rejected") {
        const Model m = Model::from_parts(
            "mixed", {"a", "b"}, {"-a + b", "-b"}, {}, Partition{{{0}, {1}}},
            {NormSpec(NormKind::One), NormSpec(NormKind::Inf)}, std::nullopt, std::nullopt, false,
            {});
        IntervalBox domain(2, Interval(-1.0, 1.0));
        CHECK_THROWS_AS(gain_matrix(m, domain, Interval::point(0.0)), ModelError);
    }
    SUBCASE("user overrides replace entries and are flagged") {
        const Model m = Model::from_parts("osc", {"p", "q", "w"}, {"w*q", "-w*p", "0"}, {},
                                          Partition{{{0, 1}, {2}}}, {},
                                          IntervalBox{Interval(-2.0, 2.0), Interval(-2.0, 2.0),
                                                      Interval(0.98, 1.02)},
                                          std::nullopt, false, {GainOverride{0, 1, 2.0}});
        IntervalBox domain = {Interval(-2.0, 2.0), Interval(-2.0, 2.0), Interval(0.98, 1.02)};
        const auto [gain, ev] = gain_matrix(m, domain, Interval::point(0.0));
        CHECK(gain(0, 1) == 2.0);  // the asserted disc bound, not the box bound
        CHECK(ev.at(0, 1, 2).user_override);
    }
}

TEST_CASE("pointwise measures and norms never exceed the gain entries") {
    Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const Model m = test_models::random_contractive_model(rng);
        // A random sub-box of the invariant box.
        IntervalBox domain;
        for (std::size_t d = 0; d < m.dim(); ++d) {
            const double lo = rng.uniform(-1.5, 0.5);
            domain.push_back(Interval(lo, lo + rng.uniform(0.1, 1.0)));
        }
        const Interval t_range(0.0, 0.5);
        const auto [gain, ev] = gain_matrix(m, domain, t_range);

        std::vector<double> x(m.dim());
        for (int sample = 0; sample < 200; ++sample) {
            for (std::size_t d = 0; d < m.dim(); ++d)
                x[d] = rng.uniform(domain[d].lo, domain[d].hi);
            const double t = rng.uniform(t_range.lo, t_range.hi);
            for (std::size_t i = 0; i < m.block_count(); ++i) {
                for (std::size_t j = 0; j < m.block_count(); ++j) {
                    const Matrix blk = point_jacobian(m, x, t, m.partition().blocks[i],
                                                      m.partition().blocks[j]);
                    const double pointwise =
                        i == j ? matrix_measure(blk, m.norm(i))
                               : mixed_norm(blk, m.norm(i), m.norm(j));
                    CHECK(pointwise <= gain(i, j) + 1e-10);
                }
            }
        }
    }
}

TEST_CASE("enlarging the domain never shrinks gain entries") {
    Rng rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const Model m = test_models::random_contractive_model(rng);
        IntervalBox small, big;
        for (std::size_t d = 0; d < m.dim(); ++d) {
            const double lo = rng.uniform(-1.0, 0.0);
            const double hi = lo + rng.uniform(0.1, 0.8);
            small.push_back(Interval(lo, hi));
            big.push_back(Interval(lo - rng.uniform(0.0, 0.5), hi + rng.uniform(0.0, 0.5)));
        }
        const auto [g_small, e1] = gain_matrix(m, small, Interval(0.0, 0.25));
        const auto [g_big, e2] = gain_matrix(m, big, Interval(0.0, 0.5));
        for (std::size_t i = 0; i < m.block_count(); ++i)
            for (std::size_t j = 0; j < m.block_count(); ++j)
                CHECK(g_small(i, j) <= g_big(i, j) + 1e-13);
    }
}

TEST_CASE("coarse domain inflation") {
    const Model m = oscillator();
    const Ball b{{1.0, 0.0, 1.0}, {0.1, 0.02}};
    SUBCASE("documented arithmetic") {
        const IntervalBox box = coarse_domain(m, b, {2.0, 0.0}, 0.1);
        // Radii become (0.3, 0.02).
        CHECK(box[0].hi == doctest::Approx(1.3).epsilon(1e-12));
        CHECK(box[0].lo == doctest::Approx(0.7).epsilon(1e-12));
        CHECK(box[2].hi == doctest::Approx(1.02).epsilon(1e-12));
    }
    SUBCASE("dt to zero recovers the ball box") {
        const IntervalBox tight = ball_to_box(m, b);
        const IntervalBox inflated = coarse_domain(m, b, {2.0, 0.0}, 1e-12);
        for (std::size_t c = 0; c < 3; ++c) {
            CHECK(inflated[c].lo == doctest::Approx(tight[c].lo).epsilon(1e-9));
            CHECK(inflated[c].hi == doctest::Approx(tight[c].hi).epsilon(1e-9));
        }
    }
    SUBCASE("parameter blocks do not inflate") {
        const IntervalBox box = coarse_domain(m, b, m.vf_bounds(Interval::point(0.0)), 0.5);
        CHECK(box[2].hi <= 1.02 + 1e-12);  // M_2 = 0
    }
}

TEST_CASE("ball propagation") {
    SUBCASE("documented example") {
        const GainMatrix c(Matrix{{0.0, 2.0}, {0.0, 0.0}});
        const Ball b{{0.0, 0.0, 0.0}, {0.1, 0.02}};
        const Ball out = propagate_ball(b, c, 1.0);
        CHECK(out.radii[0] == doctest::Approx(0.14).epsilon(1e-15));
        CHECK(out.radii[1] == 0.02);  // bit-exact: row 2 of expm is (0, 1)
    }
    SUBCASE("zero gain is the identity") {
        const GainMatrix c(Matrix(2, 2));
        const Ball b{{0.0}, {0.3, 0.7}};
        const Ball out = propagate_ball(b, c, 5.0);
        CHECK(out.radii[0] == 0.3);
        CHECK(out.radii[1] == 0.7);
    }
    SUBCASE("scalar case is a pure exponential") {
        const GainMatrix c(Matrix{{-0.7}});
        const Ball b{{0.0}, {1.0}};
        const Ball out = propagate_ball(b, c, 0.5);
        CHECK(out.radii[0] == doctest::Approx(std::exp(-0.35)).epsilon(1e-12));
    }
}

TEST_CASE("trajectory pairs obey the componentwise contraction envelope") {
    Rng rng(59);
    const double t_final = 2.0;
    const int steps = 50;
    for (int trial = 0; trial < 20; ++trial) {
        const Model m = test_models::random_contractive_model(rng);
        const auto [gain, ev] =
            gain_matrix(m, *m.invariant_box(), Interval(0.0, t_final));

        std::vector<double> x0(m.dim()), z0(m.dim());
        for (std::size_t d = 0; d < m.dim(); ++d) {
            x0[d] = rng.uniform(-0.5, 0.5);
            z0[d] = rng.uniform(-0.5, 0.5);
        }
        const Trajectory tx = simulate(m, x0, t_final, steps);
        const Trajectory tz = simulate(m, z0, t_final, steps);

        std::vector<double> d0(m.block_count());
        for (std::size_t b = 0; b < m.block_count(); ++b) {
            std::vector<double> diff;
            for (std::size_t idx : m.partition().blocks[b]) diff.push_back(x0[idx] - z0[idx]);
            d0[b] = m.norm(b).vector_norm(diff);
        }

        for (std::size_t l = 0; l < tx.size(); ++l) {
            // Hypothesis check: both trajectories stay in the domain.
            for (std::size_t d = 0; d < m.dim(); ++d) {
                REQUIRE(std::fabs(tx.points[l][d]) <= 2.0);
                REQUIRE(std::fabs(tz.points[l][d]) <= 2.0);
            }
            const Matrix env = expm(gain.matrix(), tx.times[l]);
            const std::vector<double> bound = env * d0;
            for (std::size_t b = 0; b < m.block_count(); ++b) {
                std::vector<double> diff;
                for (std::size_t idx : m.partition().blocks[b])
                    diff.push_back(tx.points[l][idx] - tz.points[l][idx]);
                CHECK(m.norm(b).vector_norm(diff) <= bound[b] + 1e-9);
            }
        }
    }
}
