#include "reach/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "reach/rng.hpp"

#include <json.hpp>

namespace reach {

void Partition::validate(std::size_t n) const {
    if (blocks.empty()) throw ModelError("partition must have at least one block");
    std::vector<bool> seen(n, false);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].empty())
            throw ModelError("partition block " + std::to_string(b) + " is empty");
        for (std::size_t idx : blocks[b]) {
            if (idx >= n)
                throw ModelError("partition block " + std::to_string(b) +
                                 " references state index " + std::to_string(idx) +
                                 " out of range");
            if (seen[idx])
                throw ModelError("partition blocks overlap at state index " + std::to_string(idx));
            seen[idx] = true;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!seen[i])
            throw ModelError("partition does not cover state index " + std::to_string(i));
}

namespace {

bool references_time(const ExprNode& n) {
    if (n.kind == ExprNode::Kind::Time) return true;
    if (n.a && references_time(*n.a)) return true;
    if (n.b && references_time(*n.b)) return true;
    return false;
}

/// Upper bound on the block norm of an interval vector.
double interval_vector_norm_bound(const std::vector<Interval>& v, const NormSpec& norm) {
    std::vector<Interval> u;
    if (norm.weighted()) {
        const Matrix& w = norm.weight();
        u.assign(w.rows(), Interval::point(0.0));
        for (std::size_t r = 0; r < w.rows(); ++r) {
            Interval acc = Interval::point(0.0);
            for (std::size_t c = 0; c < w.cols(); ++c) {
                if (w(r, c) == 0.0) continue;
                acc = acc + Interval::point(w(r, c)) * v[c];
            }
            u[r] = acc;
        }
    } else {
        u = v;
    }
    switch (norm.kind()) {
        case NormKind::One: {
            double s = 0.0;
            for (const Interval& x : u) s += x.max_abs();
            return s;
        }
        case NormKind::Two: {
            double s = 0.0;
            for (const Interval& x : u) s += x.max_abs() * x.max_abs();
            return std::sqrt(s);
        }
        case NormKind::Inf: {
            double m = 0.0;
            for (const Interval& x : u) m = std::fmax(m, x.max_abs());
            return m;
        }
    }
    return 0.0;
}

}  // namespace

Model Model::from_parts(std::string name, std::vector<std::string> states,
                        std::vector<std::string> f,
                        std::vector<std::vector<std::string>> jacobian, Partition partition,
                        std::vector<NormSpec> norms, std::optional<IntervalBox> invariant_box,
                        std::optional<std::vector<double>> vf_bounds, bool trust_vf_bounds,
                        std::vector<GainOverride> overrides) {
    Model m;
    m.name_ = std::move(name);

    if (states.empty()) throw ModelError("model needs at least one state");
    {
        std::set<std::string> unique(states.begin(), states.end());
        if (unique.size() != states.size()) throw ModelError("duplicate state names");
        if (unique.count("t")) throw ModelError("'t' is reserved for the time symbol");
    }
    m.states_ = std::move(states);
    const std::size_t n = m.states_.size();

    if (f.size() != n)
        throw ModelError("f has " + std::to_string(f.size()) + " entries for " +
                         std::to_string(n) + " states");
    m.f_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        try {
            m.f_.push_back(resolve(parse(f[i]), m.states_));
        } catch (const Error& e) {
            throw ModelError("f[" + std::to_string(i) + "] (\"" + f[i] + "\"): " + e.what());
        }
    }

    partition.validate(n);
    m.partition_ = std::move(partition);
    const std::size_t k = m.partition_.block_count();

    if (norms.empty()) norms.assign(k, NormSpec(NormKind::Two));
    if (norms.size() != k)
        throw ModelError("norms has " + std::to_string(norms.size()) + " entries for " +
                         std::to_string(k) + " partition blocks");
    for (std::size_t b = 0; b < k; ++b)
        if (norms[b].weighted() && norms[b].dim() != m.partition_.block_size(b))
            throw ModelError("norm weight for block " + std::to_string(b) +
                             " does not match the block size");
    m.norms_ = std::move(norms);

    if (invariant_box && invariant_box->size() != n)
        throw ModelError("invariant_box must have one interval per state");
    m.invariant_box_ = std::move(invariant_box);

    // Jacobian: derive symbolically, or parse the user's entries and
    // spot-check them against central finite differences.
    m.jac_.resize(n * n);
    const bool user_jacobian = !jacobian.empty();
    if (!user_jacobian) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                m.jac_[i * n + j] = differentiate(m.f_[i], m.states_[j]);
    } else {
        if (jacobian.size() != n)
            throw ModelError("jacobian must be an n x n array of expressions");
        for (std::size_t i = 0; i < n; ++i) {
            if (jacobian[i].size() != n)
                throw ModelError("jacobian row " + std::to_string(i) + " has wrong length");
            for (std::size_t j = 0; j < n; ++j) {
                try {
                    m.jac_[i * n + j] = resolve(parse(jacobian[i][j]), m.states_);
                } catch (const Error& e) {
                    throw ModelError("jacobian[" + std::to_string(i) + "][" + std::to_string(j) +
                                     "]: " + e.what());
                }
            }
        }
    }

    if (vf_bounds) {
        if (vf_bounds->size() != k) throw ModelError("M must have one bound per partition block");
        for (double v : *vf_bounds)
            if (!(std::isfinite(v) && v >= 0.0)) throw ModelError("M entries must be finite and >= 0");
    }
    m.vf_bounds_ = std::move(vf_bounds);
    m.trust_vf_bounds_ = trust_vf_bounds;
    m.overrides_ = std::move(overrides);

    m.finalize();

    if (user_jacobian) {
        // Spot-check at 20 deterministic sample points.
        Rng rng(0x5EEDu);
        const double h = 1e-6;
        int checked = 0;
        for (int attempt = 0; attempt < 200 && checked < 20; ++attempt) {
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j) {
                if (m.invariant_box_)
                    x[j] = rng.uniform((*m.invariant_box_)[j].lo, (*m.invariant_box_)[j].hi);
                else
                    x[j] = rng.uniform(-1.0, 1.0);
            }
            const double t = m.autonomous_ ? 0.0 : rng.uniform(0.0, 1.0);
            try {
                for (std::size_t i = 0; i < n; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        std::vector<double> xp = x, xm = x;
                        xp[j] += h;
                        xm[j] -= h;
                        const double fd = (eval(m.f_[i], xp, t) - eval(m.f_[i], xm, t)) / (2.0 * h);
                        const double sym = eval(m.jac_[i * n + j], x, t);
                        if (std::fabs(fd - sym) > 1e-4 * std::fmax(1.0, std::fabs(sym)))
                            throw ModelError("user jacobian[" + std::to_string(i) + "][" +
                                             std::to_string(j) +
                                             "] disagrees with finite differences: got " +
                                             std::to_string(sym) + ", expected about " +
                                             std::to_string(fd));
                    }
                }
                ++checked;
            } catch (const EvalError&) {
                // Point fell outside a function domain; try another.
            }
        }
        if (checked == 0)
            throw ModelError("could not find any admissible point to spot-check the jacobian");
    }

    // Validate supplied vector-field bounds when that is decidable at load
    // time (a box is present and f does not depend on t).
    if (m.vf_bounds_ && !m.trust_vf_bounds_ && m.invariant_box_ && m.autonomous_)
        m.validate_vf_bounds(Interval::point(0.0));

    return m;
}

void Model::finalize() {
    const std::size_t n = dim();
    const std::size_t k = partition_.block_count();

    autonomous_ = true;
    for (const Expr& e : f_)
        if (references_time(e.node())) autonomous_ = false;
    for (const Expr& e : jac_)
        if (references_time(e.node())) autonomous_ = false;

    for (const GainOverride& o : overrides_) {
        if (o.i >= k || o.j >= k) throw ModelError("gain override block index out of range");
        if (!std::isfinite(o.value)) throw ModelError("gain override value must be finite");
        if (o.i != o.j && o.value < 0.0)
            throw ModelError("off-diagonal gain overrides must be >= 0 (Metzler)");
    }

    sym_jac_.assign(k, {});
    for (std::size_t b = 0; b < k; ++b) {
        const auto& idx = partition_.blocks[b];
        const std::size_t nb = idx.size();
        sym_jac_[b].resize(nb * nb);
        for (std::size_t u = 0; u < nb; ++u)
            for (std::size_t v = 0; v < nb; ++v)
                sym_jac_[b][u * nb + v] =
                    mul(add(jac_[idx[u] * n + idx[v]], jac_[idx[v] * n + idx[u]]), lit(0.5));
    }
}

const Expr& Model::sym_jacobian(std::size_t block, std::size_t u, std::size_t v) const {
    const std::size_t nb = partition_.block_size(block);
    return sym_jac_[block][u * nb + v];
}

std::vector<double> Model::vf_bounds(const Interval& t_range) const {
    if (vf_bounds_) return *vf_bounds_;
    if (!invariant_box_)
        throw ModelError("model \"" + name_ +
                         "\" has neither M bounds nor an invariant_box to derive them from");
    std::vector<double> out(block_count());
    for (std::size_t b = 0; b < block_count(); ++b) {
        std::vector<Interval> comp;
        comp.reserve(partition_.block_size(b));
        for (std::size_t idx : partition_.blocks[b])
            comp.push_back(eval_interval(f_[idx], *invariant_box_, t_range));
        out[b] = interval_vector_norm_bound(comp, norms_[b]);
    }
    return out;
}

void Model::validate_vf_bounds(const Interval& t_range) const {
    if (!vf_bounds_ || trust_vf_bounds_) return;
    if (!invariant_box_)
        throw ModelError("M bounds supplied without an invariant_box to validate them on");
    for (std::size_t b = 0; b < block_count(); ++b) {
        std::vector<Interval> comp;
        comp.reserve(partition_.block_size(b));
        for (std::size_t idx : partition_.blocks[b])
            comp.push_back(eval_interval(f_[idx], *invariant_box_, t_range));
        const double bound = interval_vector_norm_bound(comp, norms_[b]);
        if (bound > (*vf_bounds_)[b]) {
            std::ostringstream os;
            os << "M[" << b << "] = " << (*vf_bounds_)[b]
               << " is not provable on the invariant_box: interval evaluation gives |f_" << b
               << "| <= " << bound << " (components:";
            for (const Interval& c : comp) os << " [" << c.lo << ", " << c.hi << "]";
            os << "); set trust_M to assert it anyway";
            throw ModelError(os.str());
        }
    }
}

Model Model::with_partition(Partition p) const {
    p.validate(dim());
    Model m = *this;
    // Blocks identical to one of the current blocks keep their norm; new
    // groupings default to the unweighted Euclidean norm. Stored M bounds
    // and gain overrides are block-indexed, so they do not carry over.
    std::vector<NormSpec> norms;
    norms.reserve(p.block_count());
    for (const auto& blk : p.blocks) {
        bool matched = false;
        for (std::size_t b = 0; b < partition_.block_count(); ++b) {
            if (partition_.blocks[b] == blk) {
                norms.push_back(norms_[b]);
                matched = true;
                break;
            }
        }
        if (!matched) norms.push_back(NormSpec(NormKind::Two));
    }
    m.partition_ = std::move(p);
    m.norms_ = std::move(norms);
    m.vf_bounds_.reset();
    m.trust_vf_bounds_ = false;
    m.overrides_.clear();
    m.finalize();
    return m;
}

Model Model::with_norms(std::vector<NormSpec> norms) const {
    if (norms.size() != block_count())
        throw ModelError("with_norms: need one norm per partition block");
    for (std::size_t b = 0; b < block_count(); ++b)
        if (norms[b].weighted() && norms[b].dim() != partition_.block_size(b))
            throw ModelError("with_norms: weight dimension mismatch on block " + std::to_string(b));
    Model m = *this;
    m.norms_ = std::move(norms);
    // Stored M bounds were established for the previous norms.
    m.vf_bounds_.reset();
    m.trust_vf_bounds_ = false;
    return m;
}

// ---------------------------------------------------------------------------
// JSON loading
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

NormSpec parse_norm(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw ModelError("each norms entry must be an object with a \"kind\"");
    const std::string kind = j.at("kind").get<std::string>();
    NormKind k;
    if (kind == "one")
        k = NormKind::One;
    else if (kind == "two")
        k = NormKind::Two;
    else if (kind == "inf")
        k = NormKind::Inf;
    else
        throw ModelError("unknown norm kind \"" + kind + "\" (expected one|two|inf)");
    if (!j.contains("weight")) return NormSpec(k);
    const json& w = j.at("weight");
    if (!w.is_array() || w.empty()) throw ModelError("norm weight must be a square array");
    const std::size_t n = w.size();
    Matrix weight(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        if (!w[r].is_array() || w[r].size() != n)
            throw ModelError("norm weight must be a square array");
        for (std::size_t c = 0; c < n; ++c) weight(r, c) = w[r][c].get<double>();
    }
    try {
        return NormSpec(k, std::move(weight));
    } catch (const LinalgError& e) {
        throw ModelError(std::string("invalid norm weight: ") + e.what());
    }
}

}  // namespace

Model load_model_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ModelError(std::string("model document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ModelError("model document must be a JSON object");

    try {
        const std::string name = doc.value("name", std::string("model"));
        if (!doc.contains("states")) throw ModelError("missing required field \"states\"");
        const auto states = doc.at("states").get<std::vector<std::string>>();
        if (!doc.contains("f")) throw ModelError("missing required field \"f\"");
        const auto f = doc.at("f").get<std::vector<std::string>>();

        std::vector<std::vector<std::string>> jacobian;
        if (doc.contains("jacobian"))
            jacobian = doc.at("jacobian").get<std::vector<std::vector<std::string>>>();

        if (!doc.contains("partition")) throw ModelError("missing required field \"partition\"");
        Partition partition;
        for (const auto& blk : doc.at("partition")) {
            std::vector<std::size_t> indices;
            for (const auto& name_j : blk) {
                const std::string sname = name_j.get<std::string>();
                const auto it = std::find(states.begin(), states.end(), sname);
                if (it == states.end())
                    throw ModelError("partition references undeclared state \"" + sname + "\"");
                indices.push_back(static_cast<std::size_t>(it - states.begin()));
            }
            partition.blocks.push_back(std::move(indices));
        }

        std::vector<NormSpec> norms;
        if (doc.contains("norms"))
            for (const auto& nj : doc.at("norms")) norms.push_back(parse_norm(nj));

        std::optional<IntervalBox> box;
        if (doc.contains("invariant_box")) {
            IntervalBox b;
            for (const auto& pair : doc.at("invariant_box")) {
                if (!pair.is_array() || pair.size() != 2)
                    throw ModelError("invariant_box entries must be [lo, hi] pairs");
                try {
                    b.push_back(Interval(pair[0].get<double>(), pair[1].get<double>()));
                } catch (const DomainError& e) {
                    throw ModelError(std::string("invariant_box: ") + e.what());
                }
            }
            box = std::move(b);
        }

        std::optional<std::vector<double>> vf_bounds;
        if (doc.contains("M")) vf_bounds = doc.at("M").get<std::vector<double>>();
        const bool trust = doc.value("trust_M", false);

        std::vector<GainOverride> overrides;
        if (doc.contains("c_overrides")) {
            for (const auto& oj : doc.at("c_overrides")) {
                GainOverride o;
                o.i = oj.at("i").get<std::size_t>();
                o.j = oj.at("j").get<std::size_t>();
                o.value = oj.at("value").get<double>();
                overrides.push_back(o);
            }
        }

        return Model::from_parts(name, states, f, jacobian, partition, std::move(norms),
                                 std::move(box), std::move(vf_bounds), trust, std::move(overrides));
    } catch (const json::exception& e) {
        throw ModelError(std::string("model document schema violation: ") + e.what());
    }
}

Model load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return load_model_text(ss.str());
    } catch (const ModelError& e) {
        throw ModelError(path + ": " + e.what());
    }
}

std::vector<std::vector<Expr>> block_jacobian(const Model& m, std::size_t i, std::size_t j) {
    const std::size_t k = m.block_count();
    if (i >= k || j >= k) throw ModelError("block index out of range");
    const auto& rows = m.partition().blocks[i];
    const auto& cols = m.partition().blocks[j];
    std::vector<std::vector<Expr>> out(rows.size(), std::vector<Expr>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) out[r][c] = m.jacobian(rows[r], cols[c]);
    return out;
}

}  // namespace reach
