// Test-side oracles, independent of the code paths they are used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "reach/expr.hpp"
#include "reach/matrix.hpp"
#include "reach/model.hpp"
#include "reach/rng.hpp"

namespace oracles {

/// Brute-force range of an expression over a box: dense grid plus random
/// interior samples. Returns {min, max} of the sampled values.
inline std::pair<double, double> sampled_range(const reach::Expr& e,
                                               const std::vector<reach::Interval>& box,
                                               const reach::Interval& t_range, int grid = 7,
                                               int random_samples = 200) {
    const std::size_t n = box.size();
    std::vector<double> point(n);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    const auto visit = [&](const std::vector<double>& x, double t) {
        const double v = reach::eval(e, x, t);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    };

    // Grid over the box corners/interior; t swept over its own small grid.
    std::vector<int> idx(n, 0);
    while (true) {
        for (std::size_t d = 0; d < n; ++d) {
            const double f = grid == 1 ? 0.0 : static_cast<double>(idx[d]) / (grid - 1);
            point[d] = box[d].lo + f * (box[d].hi - box[d].lo);
        }
        for (int ti = 0; ti < 3; ++ti)
            visit(point, t_range.lo + 0.5 * ti * (t_range.hi - t_range.lo));
        std::size_t d = 0;
        for (; d < n; ++d) {
            if (++idx[d] < grid) break;
            idx[d] = 0;
        }
        if (d == n) break;
    }

    reach::Rng rng(0xBEEF);
    for (int s = 0; s < random_samples; ++s) {
        for (std::size_t d = 0; d < n; ++d) point[d] = rng.uniform(box[d].lo, box[d].hi);
        visit(point, rng.uniform(t_range.lo, t_range.hi));
    }
    return {lo, hi};
}

/// Central finite difference of an expression in one variable.
inline double fd_derivative(const reach::Expr& e, const std::map<std::string, double>& env,
                            const std::string& v, double t, double h = 1e-6) {
    auto up = env, dn = env;
    up[v] += h;
    dn[v] -= h;
    return (reach::eval(e, up, t) - reach::eval(e, dn, t)) / (2.0 * h);
}

/// 30-term Taylor series for expm(A t) with scaling and squaring.
inline reach::Matrix taylor_expm(const reach::Matrix& a_in, double t, int terms = 30) {
    using reach::Matrix;
    const std::size_t n = a_in.rows();
    Matrix a = t * a_in;

    double norm = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double row = 0.0;
        for (std::size_t c = 0; c < n; ++c) row += std::fabs(a(r, c));
        norm = std::max(norm, row);
    }
    int s = 0;
    while (norm > 0.5) {
        norm *= 0.5;
        ++s;
    }
    a = std::ldexp(1.0, -s) * a;

    Matrix sum = Matrix::identity(n);
    Matrix term = Matrix::identity(n);
    for (int k = 1; k <= terms; ++k) {
        term = (1.0 / k) * (term * a);
        sum = sum + term;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

/// Largest eigenvalue of a symmetric matrix by shifted power iteration.
inline double power_iteration_max_eig(const reach::Matrix& s_in, int iterations = 20000) {
    const std::size_t n = s_in.rows();
    double shift = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double row = 0.0;
        for (std::size_t c = 0; c < n; ++c) row += std::fabs(s_in(r, c));
        shift = std::max(shift, row);
    }
    shift += 1.0;
    reach::Matrix m = s_in;
    for (std::size_t d = 0; d < n; ++d) m(d, d) += shift;

    std::vector<double> v(n);
    reach::Rng rng(0x90210);
    for (double& x : v) x = rng.uniform(0.1, 1.0);
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        std::vector<double> w = m * v;
        double norm = 0.0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        for (double& x : w) x /= norm;
        lambda = 0.0;
        std::vector<double> mw = m * w;
        for (std::size_t i = 0; i < n; ++i) lambda += w[i] * mw[i];
        v = std::move(w);
    }
    return lambda - shift;
}

/// All eigenvalues of a small general matrix: characteristic polynomial by
/// Faddeev-LeVerrier, roots by Durand-Kerner.
inline std::vector<std::complex<double>> eigenvalues(const reach::Matrix& a) {
    using reach::Matrix;
    const std::size_t n = a.rows();
    // p(x) = x^n + c[1] x^(n-1) + ... + c[n]
    std::vector<double> c(n + 1, 0.0);
    c[0] = 1.0;
    Matrix m(n, n);
    for (std::size_t k = 1; k <= n; ++k) {
        m = k == 1 ? a : a * m;
        double tr = 0.0;
        for (std::size_t d = 0; d < n; ++d) tr += m(d, d);
        c[k] = -tr / static_cast<double>(k);
        for (std::size_t d = 0; d < n; ++d) m(d, d) += c[k];
    }

    std::vector<std::complex<double>> roots(n);
    for (std::size_t i = 0; i < n; ++i)
        roots[i] = std::pow(std::complex<double>(0.4, 0.9), static_cast<double>(i));
    for (int it = 0; it < 500; ++it) {
        double moved = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::complex<double> num(c[n], 0.0);
            std::complex<double> xp(1.0, 0.0);
            for (std::size_t k = 1; k <= n; ++k) {
                xp *= roots[i];
                num += c[n - k] * xp;
            }
            std::complex<double> den(1.0, 0.0);
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) den *= roots[i] - roots[j];
            const std::complex<double> step = num / den;
            roots[i] -= step;
            moved = std::max(moved, std::abs(step));
        }
        if (moved < 1e-14) break;
    }
    return roots;
}

inline double spectral_abscissa(const reach::Matrix& a) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& r : eigenvalues(a)) best = std::max(best, r.real());
    return best;
}

/// Brute-force induced norm: max |Ax|_pi over random |x|_pj = 1.
inline double brute_force_mixed_norm(const reach::Matrix& a, reach::NormKind kind_i,
                                     reach::NormKind kind_j, int samples = 20000) {
    reach::Rng rng(0xF00D);
    const std::size_t n = a.cols();
    double best = 0.0;
    std::vector<double> x(n);
    for (int s = 0; s < samples; ++s) {
        for (double& v : x) v = rng.normal();
        const double nx = reach::vector_norm(x, kind_j);
        if (nx == 0.0) continue;
        for (double& v : x) v /= nx;
        best = std::max(best, reach::vector_norm(a * x, kind_i));
    }
    return best;
}

}  // namespace oracles
