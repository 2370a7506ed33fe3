#pragma once

#include <vector>

#include "reach/interval.hpp"
#include "reach/linalg.hpp"
#include "reach/matrix.hpp"

namespace reach {

/// Dense matrix of intervals, row-major. Encloses a family of real matrices.
class IntervalMatrix {
  public:
    IntervalMatrix() = default;
    IntervalMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), entries_(rows * cols, Interval::point(0.0)) {}

    static IntervalMatrix from_point(const Matrix& m);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Interval& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
    const Interval& operator()(std::size_t r, std::size_t c) const {
        return entries_[r * cols_ + c];
    }

    Matrix mid() const;
    Matrix rad() const;
    /// Entrywise max(|lo|, |hi|).
    Matrix max_abs() const;

    IntervalMatrix transposed() const;

    /// Count of entries with lo < hi.
    std::size_t nondegenerate_count() const;

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Interval> entries_;
};

IntervalMatrix operator+(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix operator*(const IntervalMatrix& a, const IntervalMatrix& b);
IntervalMatrix scale(const Interval& s, const IntervalMatrix& a);

/// Rigorous enclosure of P^-1: the numeric inverse inflated by a verified
/// residual bound. Throws LinalgError when P is too ill-conditioned for the
/// residual argument to close.
IntervalMatrix inverse_enclosure(const Matrix& p);

/// Sound upper bound on sup ||A|| over the interval family.
///
/// One/Inf: the norm of the entrywise max-abs matrix (this is the exact
/// supremum). Two: exact supremum by corner enumeration when the number of
/// non-degenerate entries is at most `vertex_cap`, otherwise the
/// ||mid|| + ||rad|| envelope. The enumerated paths are monotone under
/// interval inclusion; the envelope fallback may not be.
double iv_norm_bound(const IntervalMatrix& a, NormKind kind, std::size_t vertex_cap = 10);

/// Sound upper bound on sup mu(A) over the interval family (square).
///
/// One/Inf: upper diagonal endpoints plus off-diagonal max-abs sums (exact
/// supremum). Two: the symmetric part is enclosed entrywise and its largest
/// eigenvalue bounded by vertex sign-pattern enumeration for dimensions up
/// to `hertz_cap`, else by lambda_max(mid) + frobenius(rad).
double iv_measure_bound(const IntervalMatrix& a, NormKind kind, std::size_t hertz_cap = 8);

/// Exact supremum of lambda_max over a symmetric interval matrix family by
/// sign-pattern vertex enumeration (2^(n-1) eigensolves); falls back to
/// lambda_max(mid) + frobenius(rad) above `hertz_cap`.
double iv_sym_lambda_max_sup(const IntervalMatrix& s, std::size_t hertz_cap = 8);

}  // namespace reach
