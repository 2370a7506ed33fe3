#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reach/contraction.hpp"
#include "reach/linalg.hpp"
#include "reach/model.hpp"
#include "reach/parallel.hpp"
#include "reach/tube.hpp"
#include "reach/weights.hpp"

namespace {

// Exit codes, also documented in the README:
//   0 success, 1 error, 2 domain escape (tube still written),
//   3 validation violations, 4 no weight certificate found.
constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitEscape = 2;
constexpr int kExitViolations = 3;
constexpr int kExitNoCertificate = 4;

std::vector<double> parse_vector(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

reach::Matrix parse_matrix(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::stringstream ss(text);
    std::string row;
    while (std::getline(ss, row, ';')) {
        if (row.empty()) continue;
        rows.push_back(parse_vector(row));
    }
    if (rows.empty()) throw reach::Error("empty matrix");
    reach::Matrix m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size()) throw reach::Error("ragged matrix rows");
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    }
    return m;
}

reach::Partition parse_partition(const std::string& text, const std::vector<std::string>& states) {
    reach::Partition p;
    std::stringstream ss(text);
    std::string blk;
    while (std::getline(ss, blk, ';')) {
        if (blk.empty()) continue;
        std::vector<std::size_t> indices;
        std::stringstream bs(blk);
        std::string name;
        while (std::getline(bs, name, ',')) {
            if (name.empty()) continue;
            bool found = false;
            for (std::size_t i = 0; i < states.size(); ++i) {
                if (states[i] == name) {
                    indices.push_back(i);
                    found = true;
                    break;
                }
            }
            if (!found) throw reach::Error("partition names unknown state \"" + name + "\"");
        }
        p.blocks.push_back(std::move(indices));
    }
    return p;
}

std::string strip_extension(const std::string& path) {
    const std::size_t slash = path.find_last_of('/');
    const std::size_t dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
    return path.substr(0, dot);
}

int cmd_reach(const std::string& model_path, const std::string& x0_text,
              const std::string& eps_text, double t_final, int steps, const std::string& out,
              const std::string& partition_text, const std::string& plot_coords,
              const std::string& format) {
    const auto t_start = std::chrono::steady_clock::now();
    reach::Model model = reach::load_model(model_path);
    if (!partition_text.empty())
        model = model.with_partition(parse_partition(partition_text, model.states()));

    const std::vector<double> x0 = parse_vector(x0_text);
    const std::vector<double> eps = parse_vector(eps_text);
    if (x0.size() != model.dim())
        throw reach::Error("--x0 needs " + std::to_string(model.dim()) + " components");
    if (eps.size() != model.block_count())
        throw reach::Error("--eps needs " + std::to_string(model.block_count()) +
                           " radii (one per partition block)");

    const reach::ReachTube tube = reach::reach_tube(model, x0, eps, t_final, steps);

    const std::string base = strip_extension(out);
    const std::string doc_path = format == "json" || format.empty() ? base + ".json" : out;
    reach::write_tube_json(tube, doc_path);
    reach::write_tube_csv(tube, model, base + ".csv");

    std::size_t cx = 0, cy = model.dim() > 1 ? 1 : 0;
    if (!plot_coords.empty()) {
        const reach::Partition p = parse_partition(plot_coords, model.states());
        std::vector<std::size_t> flat;
        for (const auto& blk : p.blocks) flat.insert(flat.end(), blk.begin(), blk.end());
        if (flat.size() != 2) throw reach::Error("--plot-coords needs exactly two state names");
        cx = flat[0];
        cy = flat[1];
    } else if (!model.partition().blocks[0].empty()) {
        const auto& blk0 = model.partition().blocks[0];
        cx = blk0[0];
        cy = blk0.size() > 1 ? blk0[1] : (model.dim() > 1 ? (blk0[0] + 1) % model.dim() : blk0[0]);
    }
    std::size_t radius_block = 0;
    for (std::size_t b = 0; b < model.block_count(); ++b)
        for (std::size_t idx : model.partition().blocks[b])
            if (idx == cx) radius_block = b;
    reach::write_tube_gnuplot(tube, cx, cy, radius_block, base + ".dat");

    const auto elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    std::cout << "model:    " << model.name() << " (n=" << model.dim()
              << ", k=" << model.block_count() << ")\n";
    std::cout << "steps:    " << steps << " over t_final=" << t_final << "\n";
    double max_delta = 0.0;
    std::cout << "final radii:";
    for (double r : tube.balls.back().radii) {
        std::cout << ' ' << r;
        max_delta = std::fmax(max_delta, r);
    }
    std::cout << "\nmax radius: " << max_delta << "\n";
    std::cout << "outputs:  " << doc_path << ' ' << base << ".csv " << base << ".dat\n";
    std::cout << "wall time: " << elapsed << " s\n";
    if (tube.escape_step) {
        std::cout << "WARNING: coarse enclosure left the invariant box at step "
                  << *tube.escape_step
                  << "; the M bounds are only asserted there, not proven\n";
        return kExitEscape;
    }
    return kExitOk;
}

int cmd_validate(const std::string& model_path, const std::string& tube_path, std::size_t samples,
                 std::uint64_t seed, int threads) {
    const reach::Model model = reach::load_model(model_path);
    const reach::ReachTube tube = reach::load_tube_json(tube_path);
    const reach::ValidationReport report = reach::validate_tube(model, tube, samples, seed, threads);

    std::cout << "samples:     " << report.samples << " (seed " << report.seed << ")\n";
    std::cout << "max ratio:   " << report.max_ratio << "\n";
    std::cout << "violations:  " << report.violations << "\n";
    std::cout << "blowups:     " << report.blowups << "\n";
    std::cout << "center drift per block:";
    for (double d : report.center_drift) std::cout << ' ' << d;
    std::cout << "\n";
    if (report.violations > 0) {
        std::cout << "violating samples:";
        for (std::size_t s : report.violating_samples) std::cout << ' ' << s;
        std::cout << "\n";
        return kExitViolations;
    }
    return kExitOk;
}

int cmd_weights(const std::string& model_path, const std::string& targets_text,
                const std::string& box_text, const std::string& t_range_text, std::uint64_t seed,
                bool tune, const std::string& out, const std::string& report_path) {
    const reach::Model model = reach::load_model(model_path);
    const reach::Matrix targets = parse_matrix(targets_text);

    reach::IntervalBox domain;
    if (!box_text.empty()) {
        const reach::Matrix b = parse_matrix(box_text);
        if (b.cols() != 2 || b.rows() != model.dim())
            throw reach::Error("--box needs one lo,hi pair per state, ';'-separated");
        for (std::size_t r = 0; r < b.rows(); ++r)
            domain.push_back(reach::Interval(b(r, 0), b(r, 1)));
    } else if (model.invariant_box()) {
        domain = *model.invariant_box();
    } else {
        throw reach::Error("no domain: give --box or add invariant_box to the model");
    }

    reach::Interval t_range = reach::Interval::point(0.0);
    if (!t_range_text.empty()) {
        const std::vector<double> tr = parse_vector(t_range_text);
        if (tr.size() != 2) throw reach::Error("--t-range needs lo,hi");
        t_range = reach::Interval(tr[0], tr[1]);
    }

    reach::SolveOutcome outcome;
    if (tune) {
        outcome = reach::tune_c(model, domain, t_range, targets, seed);
    } else {
        const reach::FiniteSdp sdp = reach::build_finite_sdp(model, domain, t_range, targets);
        std::cout << "assembled " << sdp.constraints.size() << " LMIs over "
                  << sdp.layout.total_variables() << " variables\n";
        outcome = reach::solve_feasibility(sdp, seed);
    }

    if (!outcome.success) {
        std::cout << outcome.message << "\n";
        return kExitNoCertificate;
    }

    std::cout << "certified after " << outcome.iterations
              << " iterations, t = " << outcome.solution.achieved_t << "\n";
    if (tune) {
        std::cout << "tuned diagonal targets:";
        for (std::size_t d = 0; d < outcome.solution.targets.rows(); ++d)
            std::cout << ' ' << outcome.solution.targets(d, d);
        std::cout << "\n";
    }
    {
        std::ofstream f(out);
        if (!f) throw reach::Error("cannot write " + out);
        f << reach::norms_fragment_json(outcome.solution) << '\n';
    }
    {
        std::ofstream f(report_path);
        if (!f) throw reach::Error("cannot write " + report_path);
        f << reach::certification_report_json(outcome.solution) << '\n';
    }
    std::cout << "wrote " << out << " and " << report_path << "\n";
    return kExitOk;
}

int cmd_measure(const std::string& matrix_text, const std::string& file) {
    reach::Matrix a;
    if (!matrix_text.empty()) {
        a = parse_matrix(matrix_text);
    } else if (!file.empty()) {
        std::ifstream in(file);
        if (!in) throw reach::Error("cannot open " + file);
        std::stringstream ss;
        ss << in.rdbuf();
        std::string text = ss.str();
        for (char& c : text)
            if (c == '\n') c = ';';
        a = parse_matrix(text);
    } else {
        throw reach::Error("give --matrix or --file");
    }

    using reach::NormKind;
    const reach::NormSpec one(NormKind::One), two(NormKind::Two), inf(NormKind::Inf);
    std::cout << "norm_1:  " << reach::matrix_norm(a, one) << "\n";
    std::cout << "norm_2:  " << reach::matrix_norm(a, two) << "\n";
    std::cout << "norm_inf: " << reach::matrix_norm(a, inf) << "\n";
    if (a.square()) {
        std::cout << "mu_1:    " << reach::matrix_measure(a, one) << "\n";
        std::cout << "mu_2:    " << reach::matrix_measure(a, two) << "\n";
        std::cout << "mu_inf:  " << reach::matrix_measure(a, inf) << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reachable-tube over-approximation along sampled trajectories"};
    app.require_subcommand(1);

    // reach
    auto* reach_cmd = app.add_subcommand("reach", "Compute a reach tube along one trajectory");
    std::string model_path, x0_text, eps_text, out = "tube.json", partition_text, plot_coords,
                format;
    double t_final = 1.0;
    int steps = 100;
    reach_cmd->add_option("--model", model_path, "model document (JSON)")->required();
    reach_cmd->add_option("--x0", x0_text, "initial state, comma-separated")->required();
    reach_cmd->add_option("--eps", eps_text, "initial radii, one per block")->required();
    reach_cmd->add_option("--t-final", t_final, "time horizon")->required();
    reach_cmd->add_option("--steps", steps, "number of output steps");
    reach_cmd->add_option("--out", out, "output document path (CSV/DAT written alongside)");
    reach_cmd->add_option("--partition", partition_text,
                          "partition override: blocks ';'-separated, states ','-separated");
    reach_cmd->add_option("--plot-coords", plot_coords, "two state names for the gnuplot projection");
    reach_cmd->add_option("--format", format, "document format override (json)");

    // validate
    auto* val_cmd = app.add_subcommand("validate", "Monte Carlo falsification of a tube");
    std::string tube_path;
    std::size_t samples = 1000;
    std::uint64_t seed = 0;
    int threads = 0;
    val_cmd->add_option("--model", model_path, "model document")->required();
    val_cmd->add_option("--tube", tube_path, "tube document from `reach`")->required();
    val_cmd->add_option("--samples", samples, "number of sampled initial states")
        ->check(CLI::PositiveNumber);
    val_cmd->add_option("--seed", seed, "RNG seed (required for reproducibility)")->required();
    val_cmd->add_option("--threads", threads, "worker pool size (default: REACHTUBE_THREADS or cores)");

    // weights
    auto* w_cmd = app.add_subcommand("weights", "Search weighted norms certifying gain targets");
    std::string targets_text, box_text, t_range_text, norms_out = "norms.json",
                report_out = "certification.json";
    std::uint64_t w_seed = 1;
    bool tune = false;
    w_cmd->add_option("--model", model_path, "model document")->required();
    w_cmd->add_option("--targets", targets_text, "k x k target matrix, rows ';'-separated")
        ->required();
    w_cmd->add_option("--box", box_text, "domain box lo,hi;lo,hi;... (default: invariant_box)");
    w_cmd->add_option("--t-range", t_range_text, "time range lo,hi (default 0,0)");
    w_cmd->add_option("--seed", w_seed, "solver seed");
    w_cmd->add_flag("--tune", tune, "bisect diagonal targets downward (heuristic)");
    w_cmd->add_option("--out", norms_out, "norms fragment output path");
    w_cmd->add_option("--report", report_out, "certification report output path");

    // measure
    auto* m_cmd = app.add_subcommand("measure", "Print norms and measures of a matrix");
    std::string matrix_text, matrix_file;
    m_cmd->add_option("--matrix", matrix_text, "inline matrix, rows ';'-separated");
    m_cmd->add_option("--file", matrix_file, "file with one matrix row per line");

    CLI11_PARSE(app, argc, argv);

    try {
        if (reach_cmd->parsed())
            return cmd_reach(model_path, x0_text, eps_text, t_final, steps, out, partition_text,
                             plot_coords, format);
        if (val_cmd->parsed()) return cmd_validate(model_path, tube_path, samples, seed, threads);
        if (w_cmd->parsed())
            return cmd_weights(model_path, targets_text, box_text, t_range_text, w_seed, tune,
                               norms_out, report_out);
        if (m_cmd->parsed()) return cmd_measure(matrix_text, matrix_file);
    } catch (const reach::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
