#include "reach/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "reach/parallel.hpp"
#include "reach/rng.hpp"

#include <json.hpp>

namespace reach {

Matrix LmiConstraint::evaluate(const std::vector<double>& x) const {
    Matrix s = constant;
    for (const auto& [v, coeff] : coeffs) s = s + x[v] * coeff;
    return s;
}

SdpLayout::SdpLayout(const std::vector<std::size_t>& block_dims) : dims_(block_dims) {
    offsets_.reserve(dims_.size());
    for (std::size_t d : dims_) {
        offsets_.push_back(total_);
        total_ += d * (d + 1) / 2;
    }
}

Matrix SdpLayout::basis_element(std::size_t b, std::size_t l) const {
    const std::size_t n = dims_[b];
    Matrix e(n, n);
    if (l < n) {
        e(l, l) = 1.0;
        return e;
    }
    std::size_t rem = l - n;
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t pairs = n - s - 1;
        if (rem < pairs) {
            const std::size_t t = s + 1 + rem;
            e(s, t) = 1.0;
            e(t, s) = 1.0;
            return e;
        }
        rem -= pairs;
    }
    throw LinalgError("basis element index out of range");
}

Matrix SdpLayout::gamma(std::size_t b, const std::vector<double>& x) const {
    const std::size_t n = dims_[b];
    Matrix g(n, n);
    for (std::size_t l = 0; l < basis_size(b); ++l) {
        const double xv = x[variable(b, l)];
        if (xv == 0.0) continue;
        g = g + xv * basis_element(b, l);
    }
    return g;
}

void SdpLayout::set_identity(std::size_t b, std::vector<double>& x) const {
    for (std::size_t l = 0; l < basis_size(b); ++l) x[variable(b, l)] = l < dims_[b] ? 1.0 : 0.0;
}

double SdpLayout::trace(std::size_t b, const std::vector<double>& x) const {
    double tr = 0.0;
    for (std::size_t l = 0; l < dims_[b]; ++l) tr += x[variable(b, l)];
    return tr;
}

// ---------------------------------------------------------------------------
// Vertex families
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kMaxUncertainEntries = 12;
constexpr std::size_t kMaxTotalLmis = 100000;

void dedup(std::vector<Matrix>& family) {
    std::vector<Matrix> unique;
    for (const Matrix& m : family) {
        bool seen = false;
        for (const Matrix& u : unique)
            if (u == m) {
                seen = true;
                break;
            }
        if (!seen) unique.push_back(m);
    }
    family = std::move(unique);
}

}  // namespace

std::vector<std::vector<Matrix>> vertex_families(const Model& m, const IntervalBox& domain,
                                                 const Interval& t_range, std::size_t i,
                                                 std::size_t j,
                                                 const std::vector<Matrix>& basis) {
    std::vector<std::vector<Matrix>> families(basis.size());

    if (i == j) {
        // Build F = E J + J^T E symbolically per basis element; the additions
        // cancel skew structure before any interval is taken. The family of
        // symmetric matrices F(z) then lies in the convex hull of the corner
        // matrices of its own entry intervals.
        const auto& idx = m.partition().blocks[i];
        const std::size_t nb = idx.size();
        for (std::size_t l = 0; l < basis.size(); ++l) {
            const Matrix& e = basis[l];
            IntervalMatrix enclosure(nb, nb);
            for (std::size_t s = 0; s < nb; ++s) {
                for (std::size_t t = s; t < nb; ++t) {
                    // (E J)_{st} + (J^T E)_{st} with J the block Jacobian.
                    Expr f_st = lit(0.0);
                    for (std::size_t u = 0; u < nb; ++u) {
                        if (e(s, u) != 0.0)
                            f_st = add(f_st, mul(lit(e(s, u)), m.jacobian(idx[u], idx[t])));
                        if (e(u, t) != 0.0)
                            f_st = add(f_st, mul(lit(e(u, t)), m.jacobian(idx[u], idx[s])));
                    }
                    const Interval val = eval_interval(f_st, domain, t_range);
                    enclosure(s, t) = val;
                    enclosure(t, s) = val;
                }
            }

            std::vector<std::pair<std::size_t, std::size_t>> free_entries;
            for (std::size_t s = 0; s < nb; ++s)
                for (std::size_t t = s; t < nb; ++t)
                    if (!enclosure(s, t).is_point()) free_entries.push_back({s, t});
            if (free_entries.size() > kMaxUncertainEntries)
                throw ModelError("diagonal block " + std::to_string(i) + " has " +
                                 std::to_string(free_entries.size()) +
                                 " uncertain entries; vertex enumeration caps at " +
                                 std::to_string(kMaxUncertainEntries));

            Matrix vertex = enclosure.mid();
            for (std::size_t s = 0; s < nb; ++s)
                for (std::size_t t = 0; t < nb; ++t)
                    if (enclosure(s, t).is_point()) vertex(s, t) = enclosure(s, t).lo;
            const std::size_t combos = std::size_t{1} << free_entries.size();
            for (std::size_t mask = 0; mask < combos; ++mask) {
                for (std::size_t b = 0; b < free_entries.size(); ++b) {
                    const auto [s, t] = free_entries[b];
                    const double v = (mask >> b) & 1 ? enclosure(s, t).hi : enclosure(s, t).lo;
                    vertex(s, t) = v;
                    vertex(t, s) = v;
                }
                families[l].push_back(vertex);
            }
            dedup(families[l]);
        }
        return families;
    }

    const IntervalMatrix block = interval_block_jacobian(m, i, j, domain, t_range);

    // Off-diagonal: interval-evaluate G_l = J^T E_l J, symmetrize the
    // enclosure, and envelope it with two spectral-shift vertices.
    const IntervalMatrix block_t = block.transposed();
    for (std::size_t l = 0; l < basis.size(); ++l) {
        const IntervalMatrix g = block_t * IntervalMatrix::from_point(basis[l]) * block;
        const std::size_t n = g.rows();
        IntervalMatrix sym(n, n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) sym(r, c) = hull(g(r, c), g(c, r));
        const Matrix mid = sym.mid();
        const Matrix rad = sym.rad();
        double rho = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double row = 0.0;
            for (std::size_t c = 0; c < n; ++c) row += rad(r, c);
            rho = std::fmax(rho, row);
        }
        const Matrix mid_sym = 0.5 * (mid + mid.transposed());
        if (rho == 0.0) {
            families[l].push_back(mid_sym);
        } else {
            Matrix shift(n, n);
            for (std::size_t d = 0; d < n; ++d) shift(d, d) = rho;
            families[l].push_back(mid_sym - shift);
            families[l].push_back(mid_sym + shift);
        }
    }
    return families;
}

// ---------------------------------------------------------------------------
// Finite SDP assembly
// ---------------------------------------------------------------------------

namespace {

// Iterate over all tuples in the product of family sizes.
class TupleIterator {
  public:
    explicit TupleIterator(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
        index_.assign(sizes_.size(), 0);
        done_ = sizes_.empty();
        for (std::size_t s : sizes_)
            if (s == 0) done_ = true;
    }

    bool done() const { return done_; }
    const std::vector<std::size_t>& current() const { return index_; }

    void advance() {
        for (std::size_t p = 0; p < index_.size(); ++p) {
            if (++index_[p] < sizes_[p]) return;
            index_[p] = 0;
        }
        done_ = true;
    }

    std::size_t count() const {
        std::size_t c = 1;
        for (std::size_t s : sizes_) c *= s;
        return c;
    }

  private:
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> index_;
    bool done_ = false;
};

}  // namespace

FiniteSdp build_finite_sdp(const Model& m, const IntervalBox& domain, const Interval& t_range,
                           const Matrix& targets, double margin) {
    const std::size_t k = m.block_count();
    if (!targets.square() || targets.rows() != k)
        throw ModelError("targets must be a k x k matrix");
    if (!(margin > 0.0)) throw ModelError("margin must be positive");
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (i != j && targets(i, j) < 0.0)
                throw ModelError("off-diagonal target c[" + std::to_string(i) + "][" +
                                 std::to_string(j) +
                                 "] is negative; cross-block norms cannot beat 0");

    std::vector<std::size_t> dims(k);
    for (std::size_t b = 0; b < k; ++b) dims[b] = m.partition().block_size(b);
    FiniteSdp sdp{SdpLayout(dims), {}, targets};
    const SdpLayout& layout = sdp.layout;

    std::vector<std::vector<Matrix>> bases(k);
    for (std::size_t b = 0; b < k; ++b)
        for (std::size_t l = 0; l < layout.basis_size(b); ++l)
            bases[b].push_back(layout.basis_element(b, l));

    std::size_t total = 0;
    const auto account = [&total](std::size_t count) {
        total += count;
        if (total > kMaxTotalLmis)
            throw ModelError("vertex explosion: more than " + std::to_string(kMaxTotalLmis) +
                             " LMIs; coarsen the domain or reduce block sizes");
    };

    // (a) Definiteness surrogate per block.
    for (std::size_t b = 0; b < k; ++b) {
        account(1);
        LmiConstraint c;
        const std::size_t n = layout.block_dim(b);
        c.constant = Matrix(n, n);
        for (std::size_t d = 0; d < n; ++d) c.constant(d, d) = -margin;
        for (std::size_t l = 0; l < layout.basis_size(b); ++l)
            c.coeffs.push_back({layout.variable(b, l), bases[b][l]});
        c.label = "definiteness block " + std::to_string(b);
        sdp.constraints.push_back(std::move(c));
    }

    // (b) Diagonal measure constraints.
    for (std::size_t b = 0; b < k; ++b) {
        const auto families = vertex_families(m, domain, t_range, b, b, bases[b]);
        std::vector<std::size_t> sizes;
        for (const auto& fam : families) sizes.push_back(fam.size());
        TupleIterator it(sizes);
        account(it.count());
        const std::size_t n = layout.block_dim(b);
        std::size_t tuple_index = 0;
        for (; !it.done(); it.advance(), ++tuple_index) {
            LmiConstraint c;
            c.constant = Matrix(n, n);
            for (std::size_t l = 0; l < layout.basis_size(b); ++l) {
                const Matrix coeff =
                    2.0 * targets(b, b) * bases[b][l] - families[l][it.current()[l]];
                c.coeffs.push_back({layout.variable(b, l), coeff});
            }
            c.label = "measure block " + std::to_string(b) + " tuple " + std::to_string(tuple_index);
            sdp.constraints.push_back(std::move(c));
        }
    }

    // (c) Cross-block norm constraints.
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            const auto families = vertex_families(m, domain, t_range, i, j, bases[i]);
            std::vector<std::size_t> sizes;
            for (const auto& fam : families) sizes.push_back(fam.size());
            TupleIterator it(sizes);
            account(it.count());
            const std::size_t nj = layout.block_dim(j);
            const double c2 = targets(i, j) * targets(i, j);
            std::size_t tuple_index = 0;
            for (; !it.done(); it.advance(), ++tuple_index) {
                LmiConstraint c;
                c.constant = Matrix(nj, nj);
                for (std::size_t l = 0; l < layout.basis_size(i); ++l)
                    c.coeffs.push_back(
                        {layout.variable(i, l), -1.0 * families[l][it.current()[l]]});
                for (std::size_t l = 0; l < layout.basis_size(j); ++l)
                    c.coeffs.push_back({layout.variable(j, l), c2 * bases[j][l]});
                c.label = "norm blocks (" + std::to_string(i) + "," + std::to_string(j) +
                          ") tuple " + std::to_string(tuple_index);
                sdp.constraints.push_back(std::move(c));
            }
        }
    }
    return sdp;
}

// ---------------------------------------------------------------------------
// Subgradient feasibility solver
// ---------------------------------------------------------------------------

namespace {

struct WorstConstraint {
    std::size_t index = 0;
    double lambda_min = 0.0;
    std::vector<double> eigvec;
};

WorstConstraint find_worst(const FiniteSdp& sdp, const std::vector<double>& x) {
    WorstConstraint worst;
    worst.lambda_min = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sdp.constraints.size(); ++c) {
        const Matrix s = sdp.constraints[c].evaluate(x);
        const EigResult eig = sym_eig(s);
        if (eig.values.front() < worst.lambda_min) {
            worst.lambda_min = eig.values.front();
            worst.index = c;
            worst.eigvec.resize(s.rows());
            for (std::size_t r = 0; r < s.rows(); ++r) worst.eigvec[r] = eig.vectors(r, 0);
        }
    }
    return worst;
}

// Remove the per-block trace direction (uniform shift of the diagonal
// coordinates) so steps stay on the trace-normalized slice.
void project_trace_free(const SdpLayout& layout, std::vector<double>& g) {
    for (std::size_t b = 0; b < layout.block_count(); ++b) {
        const std::size_t n = layout.block_dim(b);
        double mean = 0.0;
        for (std::size_t l = 0; l < n; ++l) mean += g[layout.variable(b, l)];
        mean /= static_cast<double>(n);
        for (std::size_t l = 0; l < n; ++l) g[layout.variable(b, l)] -= mean;
    }
}

void renormalize_traces(const SdpLayout& layout, std::vector<double>& x, bool* degenerate) {
    *degenerate = false;
    for (std::size_t b = 0; b < layout.block_count(); ++b) {
        const double tr = layout.trace(b, x);
        const double target = static_cast<double>(layout.block_dim(b));
        if (!(tr > 1e-12)) {
            *degenerate = true;
            return;
        }
        const double scale = target / tr;
        for (std::size_t l = 0; l < layout.basis_size(b); ++l) x[layout.variable(b, l)] *= scale;
    }
}

}  // namespace

SolveOutcome solve_feasibility(const FiniteSdp& sdp, std::uint64_t seed, int max_iterations) {
    const SdpLayout& layout = sdp.layout;
    SolveOutcome out;

    std::vector<double> x(layout.total_variables(), 0.0);
    for (std::size_t b = 0; b < layout.block_count(); ++b) layout.set_identity(b, x);

    Rng rng(seed);
    std::vector<double> best_x = x;
    double best_t = find_worst(sdp, x).lambda_min;
    int stall = 0;

    int iter = 0;
    for (; iter < max_iterations; ++iter) {
        if (best_t >= 1e-7) break;  // comfortably feasible
        if (stall > 1200) break;    // no progress; accept the best point found

        const WorstConstraint worst = find_worst(sdp, x);

        // Subgradient of lambda_min of the worst constraint: v^T Coeff v per
        // decision variable.
        std::vector<double> g(layout.total_variables(), 0.0);
        const LmiConstraint& c = sdp.constraints[worst.index];
        for (const auto& [v, coeff] : c.coeffs) {
            double quad = 0.0;
            for (std::size_t r = 0; r < coeff.rows(); ++r)
                for (std::size_t s = 0; s < coeff.cols(); ++s)
                    quad += worst.eigvec[r] * coeff(r, s) * worst.eigvec[s];
            g[v] += quad;
        }
        project_trace_free(layout, g);

        double gnorm = 0.0;
        for (double v : g) gnorm += v * v;
        gnorm = std::sqrt(gnorm);
        if (gnorm < 1e-14) {
            // Flat direction: jitter within the trace slice to escape.
            for (double& v : g) v = rng.uniform(-1.0, 1.0);
            project_trace_free(layout, g);
            gnorm = 0.0;
            for (double v : g) gnorm += v * v;
            gnorm = std::sqrt(gnorm);
            if (gnorm < 1e-14) break;
        }

        const double step = 0.5 / std::sqrt(1.0 + iter);
        std::vector<double> candidate = x;
        for (std::size_t v = 0; v < candidate.size(); ++v) candidate[v] += step * g[v] / gnorm;

        bool degenerate = false;
        renormalize_traces(layout, candidate, &degenerate);
        if (degenerate) {
            ++stall;
            continue;
        }
        x = std::move(candidate);

        const double t = find_worst(sdp, x).lambda_min;
        if (t > best_t + 1e-12) {
            best_t = t;
            best_x = x;
            stall = 0;
        } else {
            ++stall;
        }
    }
    out.iterations = iter;

    if (best_t < 0.0) {
        out.success = false;
        std::ostringstream os;
        os << "no certificate found after " << iter << " iterations (best t = " << best_t
           << "); this is not a proof of infeasibility";
        out.message = os.str();
        return out;
    }

    WeightSolution sol;
    sol.x = best_x;
    sol.targets = sdp.targets;
    sol.achieved_t = best_t;
    for (std::size_t b = 0; b < layout.block_count(); ++b) {
        Matrix gamma = layout.gamma(b, best_x);
        sol.gammas.push_back(gamma);
        sol.weights.push_back(sym_sqrt(gamma));
    }
    sol.certification = certify(sol, sdp);
    if (!sol.certification.ok) {
        out.success = false;
        out.message = "solver point failed independent certification (constraint " +
                      std::to_string(sol.certification.worst_index) +
                      ", lambda_min = " + std::to_string(sol.certification.worst_value) + ")";
        return out;
    }
    out.success = true;
    out.solution = std::move(sol);
    out.message = "certified";
    return out;
}

CertificationRecord certify(const WeightSolution& solution, const FiniteSdp& sdp) {
    CertificationRecord rec;
    rec.lambda_mins.assign(sdp.constraints.size(), 0.0);
    const std::vector<double>& x = solution.x;
#pragma omp parallel for schedule(dynamic, 16)
    for (long long c = 0; c < static_cast<long long>(sdp.constraints.size()); ++c) {
        const Matrix s = sdp.constraints[static_cast<std::size_t>(c)].evaluate(x);
        rec.lambda_mins[static_cast<std::size_t>(c)] = sym_eig_min(s);
    }
    rec.ok = true;
    rec.worst_value = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < rec.lambda_mins.size(); ++c) {
        if (rec.lambda_mins[c] < rec.worst_value) {
            rec.worst_value = rec.lambda_mins[c];
            rec.worst_index = c;
        }
    }
    if (rec.worst_value < -1e-9) rec.ok = false;
    return rec;
}

std::vector<NormSpec> to_norm_specs(const WeightSolution& solution) {
    std::vector<NormSpec> out;
    out.reserve(solution.weights.size());
    for (const Matrix& p : solution.weights) out.push_back(NormSpec(NormKind::Two, p));
    return out;
}

namespace {
nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}
}  // namespace

std::string norms_fragment_json(const WeightSolution& solution) {
    nlohmann::json norms = nlohmann::json::array();
    for (const Matrix& p : solution.weights)
        norms.push_back({{"kind", "two"}, {"weight", matrix_to_json(p)}});
    return nlohmann::json{{"norms", std::move(norms)}}.dump(2);
}

std::string certification_report_json(const WeightSolution& solution) {
    nlohmann::json doc;
    doc["achieved_t"] = solution.achieved_t;
    doc["targets"] = matrix_to_json(solution.targets);
    doc["certified"] = solution.certification.ok;
    doc["worst_constraint"] = solution.certification.worst_index;
    doc["worst_lambda_min"] = solution.certification.worst_value;
    doc["lambda_mins"] = solution.certification.lambda_mins;
    nlohmann::json gammas = nlohmann::json::array();
    for (const Matrix& g : solution.gammas) gammas.push_back(matrix_to_json(g));
    doc["gammas"] = std::move(gammas);
    return doc.dump(2);
}

SolveOutcome tune_c(const Model& m, const IntervalBox& domain, const Interval& t_range,
                    Matrix targets, std::uint64_t seed, int bisection_steps) {
    const auto feasible = [&](const Matrix& c) {
        const FiniteSdp sdp = build_finite_sdp(m, domain, t_range, c);
        return solve_feasibility(sdp, seed);
    };

    SolveOutcome base = feasible(targets);
    if (!base.success) return base;

    for (std::size_t d = 0; d < targets.rows(); ++d) {
        // Find an infeasible lower bracket by doubling steps downward.
        double hi = targets(d, d);
        double span = std::fmax(1.0, std::fabs(hi));
        double lo = hi - span;
        Matrix probe = targets;
        for (int expand = 0; expand < 8; ++expand) {
            probe(d, d) = lo;
            if (!feasible(probe).success) break;
            hi = lo;
            span *= 2.0;
            lo = hi - span;
        }
        for (int it = 0; it < bisection_steps; ++it) {
            const double mid = 0.5 * (lo + hi);
            probe(d, d) = mid;
            if (feasible(probe).success)
                hi = mid;
            else
                lo = mid;
        }
        targets(d, d) = hi;
    }

    SolveOutcome tuned = feasible(targets);
    if (tuned.success) tuned.solution.targets = targets;
    return tuned;
}

}  // namespace reach
