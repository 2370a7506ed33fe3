#include <fstream>
#include <iomanip>
#include <sstream>

#include "reach/tube.hpp"

#include <json.hpp>

namespace reach {

namespace {

using nlohmann::json;

json box_to_json(const IntervalBox& box) {
    json out = json::array();
    for (const Interval& iv : box) out.push_back({iv.lo, iv.hi});
    return out;
}

IntervalBox box_from_json(const json& j) {
    IntervalBox box;
    for (const auto& pair : j) box.push_back(Interval(pair[0].get<double>(), pair[1].get<double>()));
    return box;
}

json interval_matrix_to_json(const IntervalMatrix& m) {
    json lo = json::array(), hi = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json lo_row = json::array(), hi_row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) {
            lo_row.push_back(m(r, c).lo);
            hi_row.push_back(m(r, c).hi);
        }
        lo.push_back(lo_row);
        hi.push_back(hi_row);
    }
    return {{"lo", lo}, {"hi", hi}};
}

json evidence_to_json(const BoundEvidence& ev, std::size_t k) {
    json entries = json::array();
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const EntryEvidence& e = ev.at(i, j, k);
            json ej = {{"i", i}, {"j", j}, {"bound", e.bound}};
            if (e.user_override)
                ej["user_override"] = true;
            else
                ej["enclosure"] = interval_matrix_to_json(e.enclosure);
            entries.push_back(std::move(ej));
        }
    }
    return {{"domain", box_to_json(ev.domain)},
            {"t_range", {ev.t_range.lo, ev.t_range.hi}},
            {"entries", std::move(entries)}};
}

}  // namespace

std::string tube_to_json(const ReachTube& tube) {
    const std::size_t k = tube.balls.empty() ? 0 : tube.balls[0].radii.size();
    json doc;
    doc["model"] = tube.model_name;
    doc["times"] = tube.times;

    json centers = json::array(), radii = json::array();
    for (const Ball& b : tube.balls) {
        centers.push_back(b.center);
        radii.push_back(b.radii);
    }
    doc["centers"] = std::move(centers);
    doc["radii"] = std::move(radii);

    doc["settings"] = {{"t_final", tube.settings.t_final},
                       {"steps", tube.settings.steps},
                       {"substeps", tube.settings.substeps},
                       {"x0", tube.settings.x0},
                       {"eps", tube.settings.eps}};
    doc["M"] = tube.vf_bounds_used;
    if (tube.escape_step) doc["escape_step"] = *tube.escape_step;

    json coarse = json::array();
    for (const IntervalBox& box : tube.coarse) coarse.push_back(box_to_json(box));
    doc["coarse_domains"] = std::move(coarse);

    json evidence = json::array();
    for (const BoundEvidence& ev : tube.evidence) evidence.push_back(evidence_to_json(ev, k));
    doc["evidence"] = std::move(evidence);

    return doc.dump(2);
}

void write_tube_json(const ReachTube& tube, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << tube_to_json(tube) << '\n';
}

ReachTube tube_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("tube document is not valid JSON: ") + e.what());
    }
    try {
        ReachTube tube;
        tube.model_name = doc.at("model").get<std::string>();
        tube.times = doc.at("times").get<std::vector<double>>();
        const auto centers = doc.at("centers").get<std::vector<std::vector<double>>>();
        const auto radii = doc.at("radii").get<std::vector<std::vector<double>>>();
        if (centers.size() != tube.times.size() || radii.size() != tube.times.size())
            throw Error("tube document: times/centers/radii lengths disagree");
        for (std::size_t l = 0; l < centers.size(); ++l)
            tube.balls.push_back(Ball{centers[l], radii[l]});

        const json& s = doc.at("settings");
        tube.settings.t_final = s.at("t_final").get<double>();
        tube.settings.steps = s.at("steps").get<int>();
        tube.settings.substeps = s.at("substeps").get<int>();
        tube.settings.x0 = s.at("x0").get<std::vector<double>>();
        tube.settings.eps = s.at("eps").get<std::vector<double>>();
        tube.vf_bounds_used = doc.value("M", std::vector<double>{});
        if (doc.contains("escape_step")) tube.escape_step = doc.at("escape_step").get<int>();
        if (doc.contains("coarse_domains"))
            for (const auto& bj : doc.at("coarse_domains")) tube.coarse.push_back(box_from_json(bj));
        // Evidence enclosures are audit output; they are not reloaded.
        return tube;
    } catch (const json::exception& e) {
        throw Error(std::string("tube document schema violation: ") + e.what());
    }
}

ReachTube load_tube_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open tube file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return tube_from_json(ss.str());
}

void write_tube_csv(const ReachTube& tube, const Model& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << std::setprecision(17);
    out << "t";
    for (const std::string& s : m.states()) out << ",c_" << s;
    for (std::size_t b = 0; b < m.block_count(); ++b) out << ",radius_" << (b + 1);
    out << '\n';
    for (std::size_t l = 0; l < tube.times.size(); ++l) {
        out << tube.times[l];
        for (double c : tube.balls[l].center) out << ',' << c;
        for (double r : tube.balls[l].radii) out << ',' << r;
        out << '\n';
    }
}

void write_tube_gnuplot(const ReachTube& tube, std::size_t coord_x, std::size_t coord_y,
                        std::size_t radius_block, const std::string& path) {
    if (tube.balls.empty()) throw Error("empty tube");
    if (coord_x >= tube.balls[0].center.size() || coord_y >= tube.balls[0].center.size())
        throw Error("projection coordinate out of range");
    if (radius_block >= tube.balls[0].radii.size()) throw Error("radius block out of range");
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << std::setprecision(17);
    out << "# t cx cy r\n";
    for (std::size_t l = 0; l < tube.times.size(); ++l) {
        out << tube.times[l] << ' ' << tube.balls[l].center[coord_x] << ' '
            << tube.balls[l].center[coord_y] << ' ' << tube.balls[l].radii[radius_block] << '\n';
    }
}

}  // namespace reach
