#include "reach/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace reach {

const char* norm_kind_name(NormKind k) {
    switch (k) {
        case NormKind::One: return "one";
        case NormKind::Two: return "two";
        case NormKind::Inf: return "inf";
    }
    return "?";
}

namespace {

double unweighted_norm(const Matrix& a, NormKind kind);

bool is_diagonal(const Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            if (r != c && m(r, c) != 0.0) return false;
    return true;
}

}  // namespace

NormSpec::NormSpec(NormKind kind, Matrix weight) : kind_(kind) {
    if (!weight.square()) throw LinalgError("norm weight must be square");
    if (!weight.all_finite()) throw LinalgError("norm weight has non-finite entries");
    if (kind == NormKind::One || kind == NormKind::Inf) {
        if (!is_diagonal(weight))
            throw LinalgError("one/inf norm weights must be diagonal");
        for (std::size_t i = 0; i < weight.rows(); ++i)
            if (!(weight(i, i) > 0.0))
                throw LinalgError("one/inf norm weights must have strictly positive diagonal");
    } else {
        // Reject nearly singular P: rcond estimated from the spectrum of P^T P.
        const EigResult eig = sym_eig(weight.transposed() * weight);
        const double lo = std::fmax(eig.values.front(), 0.0);
        const double hi = eig.values.back();
        if (!(hi > 0.0) || std::sqrt(lo / hi) < 1e-12)
            throw LinalgError("two-norm weight is singular or too ill-conditioned (rcond < 1e-12)");
    }
    weight_ = std::move(weight);
    weight_inv_ = inverse(*weight_);
}

double vector_norm(const std::vector<double>& v, NormKind kind) {
    switch (kind) {
        case NormKind::One: {
            double s = 0.0;
            for (double x : v) s += std::fabs(x);
            return s;
        }
        case NormKind::Two: {
            double s = 0.0;
            for (double x : v) s += x * x;
            return std::sqrt(s);
        }
        case NormKind::Inf: {
            double m = 0.0;
            for (double x : v) m = std::fmax(m, std::fabs(x));
            return m;
        }
    }
    return 0.0;
}

double NormSpec::vector_norm(const std::vector<double>& v) const {
    if (!weighted()) return reach::vector_norm(v, kind_);
    return reach::vector_norm(weight() * v, kind_);
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi
// ---------------------------------------------------------------------------

EigResult sym_eig(const Matrix& s) {
    if (!s.square()) throw LinalgError("sym_eig on a non-square matrix");
    const std::size_t n = s.rows();

    const double scale = unweighted_norm(s, NormKind::Inf);
    const double asym = unweighted_norm(s - s.transposed(), NormKind::Inf);
    if (asym > 1e-10 * std::fmax(scale, 1e-300) && asym > 0.0)
        throw LinalgError("sym_eig input is not symmetric");

    Matrix a = 0.5 * (s + s.transposed());
    Matrix v = Matrix::identity(n);

    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-15 * std::fmax(scale, 1e-300)) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;

                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - sn * aiq;
                    a(p, i) = a(i, p);
                    a(i, q) = sn * aip + c * aiq;
                    a(q, i) = a(i, q);
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - sn * viq;
                    v(i, q) = sn * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

    EigResult out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

double sym_eig_max(const Matrix& s) { return sym_eig(s).values.back(); }
double sym_eig_min(const Matrix& s) { return sym_eig(s).values.front(); }

Matrix sym_sqrt(const Matrix& s, double tol) {
    const EigResult eig = sym_eig(s);
    const std::size_t n = s.rows();
    Matrix r(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        double lam = eig.values[k];
        if (lam < 0.0) {
            if (lam < -tol * std::fmax(std::fabs(eig.values.back()), 1.0))
                throw LinalgError("sym_sqrt of an indefinite matrix");
            lam = 0.0;
        }
        const double root = std::sqrt(lam);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                r(i, j) += root * eig.vectors(i, k) * eig.vectors(j, k);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Norms and measures
// ---------------------------------------------------------------------------

namespace {

double unweighted_norm(const Matrix& a, NormKind kind) {
    switch (kind) {
        case NormKind::One: {
            double best = 0.0;
            for (std::size_t c = 0; c < a.cols(); ++c) {
                double s = 0.0;
                for (std::size_t r = 0; r < a.rows(); ++r) s += std::fabs(a(r, c));
                best = std::fmax(best, s);
            }
            return best;
        }
        case NormKind::Inf: {
            double best = 0.0;
            for (std::size_t r = 0; r < a.rows(); ++r) {
                double s = 0.0;
                for (std::size_t c = 0; c < a.cols(); ++c) s += std::fabs(a(r, c));
                best = std::fmax(best, s);
            }
            return best;
        }
        case NormKind::Two: {
            if (a.rows() == 0 || a.cols() == 0) return 0.0;
            const double lam = sym_eig_max(a.transposed() * a);
            return std::sqrt(std::fmax(lam, 0.0));
        }
    }
    return 0.0;
}

double unweighted_measure(const Matrix& a, NormKind kind) {
    switch (kind) {
        case NormKind::One: {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < a.cols(); ++j) {
                double s = a(j, j);
                for (std::size_t i = 0; i < a.rows(); ++i)
                    if (i != j) s += std::fabs(a(i, j));
                best = std::fmax(best, s);
            }
            return best;
        }
        case NormKind::Inf: {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < a.rows(); ++i) {
                double s = a(i, i);
                for (std::size_t j = 0; j < a.cols(); ++j)
                    if (j != i) s += std::fabs(a(i, j));
                best = std::fmax(best, s);
            }
            return best;
        }
        case NormKind::Two: return sym_eig_max(0.5 * (a + a.transposed()));
    }
    return 0.0;
}

Matrix similarity(const Matrix& a, const NormSpec& norm) {
    return norm.weight() * a * norm.weight_inverse();
}

}  // namespace

double matrix_norm(const Matrix& a, const NormSpec& norm) {
    if (!a.all_finite()) throw LinalgError("matrix_norm input has non-finite entries");
    if (!norm.weighted()) return unweighted_norm(a, norm.kind());
    if (norm.dim() != a.rows() || norm.dim() != a.cols())
        throw LinalgError("norm weight dimension does not match matrix");
    return unweighted_norm(similarity(a, norm), norm.kind());
}

double matrix_measure(const Matrix& a, const NormSpec& norm) {
    if (!a.square()) throw LinalgError("matrix_measure of a non-square matrix");
    if (!a.all_finite()) throw LinalgError("matrix_measure input has non-finite entries");
    if (!norm.weighted()) return unweighted_measure(a, norm.kind());
    if (norm.dim() != a.rows())
        throw LinalgError("norm weight dimension does not match matrix");
    return unweighted_measure(similarity(a, norm), norm.kind());
}

double mixed_norm(const Matrix& a, const NormSpec& norm_i, const NormSpec& norm_j) {
    if (norm_i.kind() != norm_j.kind())
        throw LinalgError(
            "mixed norms across different norm kinds are not supported: exact values for "
            "mismatched kinds have no closed form here (got " +
            std::string(norm_kind_name(norm_i.kind())) + " vs " + norm_kind_name(norm_j.kind()) + ")");
    if (norm_i.weighted() && norm_i.dim() != a.rows())
        throw LinalgError("row-side weight dimension does not match block");
    if (norm_j.weighted() && norm_j.dim() != a.cols())
        throw LinalgError("column-side weight dimension does not match block");

    Matrix b = a;
    if (norm_i.weighted()) b = norm_i.weight() * b;
    if (norm_j.weighted()) b = b * norm_j.weight_inverse();
    return unweighted_norm(b, norm_i.kind());
}

// ---------------------------------------------------------------------------
// Matrix exponential
// ---------------------------------------------------------------------------

bool is_metzler(const Matrix& c, double tol) {
    if (!c.square()) return false;
    for (std::size_t i = 0; i < c.rows(); ++i)
        for (std::size_t j = 0; j < c.cols(); ++j)
            if (i != j && c(i, j) < -tol) return false;
    return true;
}

namespace {

// Solve D X = N by Gauss-Jordan with partial pivoting.
Matrix solve_linear(Matrix d, Matrix n) {
    const std::size_t m = d.rows();
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::fabs(d(r, col)) > std::fabs(d(pivot, col))) pivot = r;
        if (std::fabs(d(pivot, col)) < 1e-300) throw LinalgError("singular Pade denominator");
        if (pivot != col) {
            for (std::size_t c = 0; c < m; ++c) {
                std::swap(d(pivot, c), d(col, c));
                std::swap(n(pivot, c), n(col, c));
            }
        }
        const double piv = d(col, col);
        if (piv != 1.0) {
            for (std::size_t c = 0; c < m; ++c) {
                d(col, c) /= piv;
                n(col, c) /= piv;
            }
        }
        for (std::size_t r = 0; r < m; ++r) {
            if (r == col) continue;
            const double f = d(r, col);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < m; ++c) {
                d(r, c) -= f * d(col, c);
                n(r, c) -= f * n(col, c);
            }
        }
    }
    return n;
}

}  // namespace

Matrix expm(const Matrix& c, double t) {
    if (!c.square()) throw LinalgError("expm of a non-square matrix");
    if (!(t >= 0.0)) throw LinalgError("expm requires t >= 0");
    if (!c.all_finite()) throw LinalgError("expm input has non-finite entries");
    const std::size_t n = c.rows();
    const bool metzler = is_metzler(c);

    Matrix a = t * c;
    const double norm = unweighted_norm(a, NormKind::Inf);
    int s = 0;
    if (norm > 0.25) s = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
    if (s > 0) a = std::ldexp(1.0, -s) * a;

    // Pade(6) numerator/denominator coefficients.
    static const double coef[7] = {1.0,         1.0 / 2.0,      5.0 / 44.0, 1.0 / 66.0,
                                   1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
    Matrix power = Matrix::identity(n);
    Matrix num = Matrix::identity(n);
    Matrix den = Matrix::identity(n);
    for (int k = 1; k <= 6; ++k) {
        power = power * a;
        const Matrix term = coef[k] * power;
        num = num + term;
        den = (k % 2 == 0) ? den + term : den - term;
    }
    Matrix x = solve_linear(den, num);
    for (int i = 0; i < s; ++i) x = x * x;

    if (metzler) {
        for (double& v : x.data()) v = std::fmax(v, 0.0);
    }
    return x;
}

GainMatrix::GainMatrix(Matrix c) : c_(std::move(c)) {
    if (!c_.square()) throw LinalgError("gain matrix must be square");
    if (!c_.all_finite()) throw LinalgError("gain matrix has non-finite entries");
    if (!is_metzler(c_))
        throw LinalgError("gain matrix must be Metzler (nonnegative off-diagonal entries)");
}

}  // namespace reach
