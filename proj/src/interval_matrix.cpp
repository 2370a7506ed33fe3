#include "reach/interval_matrix.hpp"

#include <cmath>
#include <limits>

namespace reach {

IntervalMatrix IntervalMatrix::from_point(const Matrix& m) {
    IntervalMatrix r(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = Interval::point(m(i, j));
    return r;
}

Matrix IntervalMatrix::mid() const {
    Matrix m(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).mid();
    return m;
}

Matrix IntervalMatrix::rad() const {
    Matrix m(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).rad();
    return m;
}

Matrix IntervalMatrix::max_abs() const {
    Matrix m(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).max_abs();
    return m;
}

IntervalMatrix IntervalMatrix::transposed() const {
    IntervalMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

std::size_t IntervalMatrix::nondegenerate_count() const {
    std::size_t n = 0;
    for (const Interval& e : entries_)
        if (!e.is_point()) ++n;
    return n;
}

IntervalMatrix operator+(const IntervalMatrix& a, const IntervalMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw LinalgError("shape mismatch in interval matrix addition");
    IntervalMatrix r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) + b(i, j);
    return r;
}

IntervalMatrix operator*(const IntervalMatrix& a, const IntervalMatrix& b) {
    if (a.cols() != b.rows()) throw LinalgError("shape mismatch in interval matrix product");
    IntervalMatrix r(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            Interval acc = Interval::point(0.0);
            for (std::size_t k = 0; k < a.cols(); ++k) {
                const Interval& x = a(i, k);
                const Interval& y = b(k, j);
                if ((x.lo == 0.0 && x.hi == 0.0) || (y.lo == 0.0 && y.hi == 0.0)) continue;
                acc = acc + x * y;
            }
            r(i, j) = acc;
        }
    }
    return r;
}

IntervalMatrix scale(const Interval& s, const IntervalMatrix& a) {
    IntervalMatrix r(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = s * a(i, j);
    return r;
}

IntervalMatrix inverse_enclosure(const Matrix& p) {
    const Matrix pinv = inverse(p);
    const std::size_t n = p.rows();

    // Residual R = P*Pinv - I computed in interval arithmetic encloses the
    // exact real residual of the numeric inverse.
    IntervalMatrix residual = IntervalMatrix::from_point(p) * IntervalMatrix::from_point(pinv);
    for (std::size_t i = 0; i < n; ++i)
        residual(i, i) = residual(i, i) - Interval::point(1.0);

    double beta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += residual(i, j).max_abs();
        beta = std::fmax(beta, row);
    }
    beta *= 1.0 + 1e-14;  // absorb the rounding of the row sums
    if (beta >= 1e-6)
        throw LinalgError("matrix too ill-conditioned for a rigorous inverse enclosure");

    // P^-1 = Pinv (I + R)^-1, and ||(I+R)^-1 - I||_inf <= beta/(1-beta), so
    // entry (s,t) of the true inverse deviates from Pinv by at most
    // rowsum_s(|Pinv|) * beta/(1-beta).
    const double delta = beta / (1.0 - beta);
    IntervalMatrix out(n, n);
    for (std::size_t s = 0; s < n; ++s) {
        double rowsum = 0.0;
        for (std::size_t t = 0; t < n; ++t) rowsum += std::fabs(pinv(s, t));
        const double slack = rowsum * delta * (1.0 + 1e-14) + 1e-300;
        for (std::size_t t = 0; t < n; ++t)
            out(s, t) = widen_ulps(Interval(pinv(s, t) - slack, pinv(s, t) + slack), 2);
    }
    return out;
}

namespace {

double frobenius(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return std::sqrt(s);
}

// Enumerate entry corners of the non-degenerate entries (at most cap of
// them) and maximize fn over the resulting point matrices.
template <typename Fn>
double corner_maximum(const IntervalMatrix& a, std::size_t cap, Fn&& fn, bool* done) {
    std::vector<std::pair<std::size_t, std::size_t>> free_entries;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (!a(i, j).is_point()) free_entries.push_back({i, j});
    if (free_entries.size() > cap) {
        *done = false;
        return 0.0;
    }
    *done = true;
    Matrix point = a.mid();
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (a(i, j).is_point()) point(i, j) = a(i, j).lo;

    double best = -std::numeric_limits<double>::infinity();
    const std::size_t combos = std::size_t{1} << free_entries.size();
    for (std::size_t mask = 0; mask < combos; ++mask) {
        for (std::size_t b = 0; b < free_entries.size(); ++b) {
            const auto [i, j] = free_entries[b];
            point(i, j) = (mask >> b) & 1 ? a(i, j).hi : a(i, j).lo;
        }
        best = std::fmax(best, fn(point));
    }
    return best;
}

}  // namespace

double iv_norm_bound(const IntervalMatrix& a, NormKind kind, std::size_t vertex_cap) {
    switch (kind) {
        case NormKind::One: {
            const Matrix m = a.max_abs();
            double best = 0.0;
            for (std::size_t c = 0; c < m.cols(); ++c) {
                double s = 0.0;
                for (std::size_t r = 0; r < m.rows(); ++r) s += m(r, c);
                best = std::fmax(best, s);
            }
            return best;
        }
        case NormKind::Inf: {
            const Matrix m = a.max_abs();
            double best = 0.0;
            for (std::size_t r = 0; r < m.rows(); ++r) {
                double s = 0.0;
                for (std::size_t c = 0; c < m.cols(); ++c) s += m(r, c);
                best = std::fmax(best, s);
            }
            return best;
        }
        case NormKind::Two: {
            bool done = false;
            const NormSpec two(NormKind::Two);
            const double v = corner_maximum(
                a, vertex_cap, [&](const Matrix& p) { return matrix_norm(p, two); }, &done);
            if (done) return v;
            return matrix_norm(a.mid(), two) + matrix_norm(a.rad(), two);
        }
    }
    return 0.0;
}

double iv_sym_lambda_max_sup(const IntervalMatrix& s, std::size_t hertz_cap) {
    const std::size_t n = s.rows();
    if (n != s.cols()) throw LinalgError("symmetric interval matrix must be square");
    if (n == 0) return 0.0;
    const Matrix mid = s.mid();
    const Matrix rad = s.rad();
    if (n > hertz_cap) return sym_eig_max(mid) + frobenius(0.5 * (rad + rad.transposed()));

    // Sign-pattern vertices: diagonal deviations at their upper endpoints,
    // off-diagonal deviations mid + sigma_i sigma_j rad. Fixing sigma_0 = +1
    // halves the enumeration.
    double best = -std::numeric_limits<double>::infinity();
    const std::size_t combos = n == 1 ? 1 : (std::size_t{1} << (n - 1));
    Matrix vertex(n, n);
    for (std::size_t mask = 0; mask < combos; ++mask) {
        std::vector<double> sigma(n, 1.0);
        for (std::size_t b = 1; b < n; ++b) sigma[b] = (mask >> (b - 1)) & 1 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double dev = i == j ? rad(i, j) : sigma[i] * sigma[j] * rad(i, j);
                vertex(i, j) = mid(i, j) + dev;
            }
        }
        best = std::fmax(best, sym_eig_max(0.5 * (vertex + vertex.transposed())));
    }
    return best;
}

double iv_measure_bound(const IntervalMatrix& a, NormKind kind, std::size_t hertz_cap) {
    const std::size_t n = a.rows();
    if (n != a.cols()) throw LinalgError("measure bound needs a square interval matrix");
    switch (kind) {
        case NormKind::One: {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n; ++j) {
                double s = a(j, j).hi;
                for (std::size_t i = 0; i < n; ++i)
                    if (i != j) s += a(i, j).max_abs();
                best = std::fmax(best, s);
            }
            return best;
        }
        case NormKind::Inf: {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                double s = a(i, i).hi;
                for (std::size_t j = 0; j < n; ++j)
                    if (j != i) s += a(i, j).max_abs();
                best = std::fmax(best, s);
            }
            return best;
        }
        case NormKind::Two: {
            const IntervalMatrix sym = scale(Interval::point(0.5), a + a.transposed());
            return iv_sym_lambda_max_sup(sym, hertz_cap);
        }
    }
    return 0.0;
}

}  // namespace reach
