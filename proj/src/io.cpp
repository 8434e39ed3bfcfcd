#include "rlcongest/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rlc {

using nlohmann::json;

std::string graph_to_text(const AttributedGraph& g) {
    std::ostringstream out;
    out << g.n << ' ' << g.m() << '\n';
    for (auto [u, v] : g.edges) out << u << ' ' << v << '\n';
    return out.str();
}

AttributedGraph graph_from_text(const std::string& text) {
    std::istringstream in(text);
    AttributedGraph g;
    long long m = 0;
    if (!(in >> g.n >> m)) throw IoError("bad graph header (expected \"n m\")");
    for (long long i = 0; i < m; ++i) {
        int u = 0, v = 0;
        if (!(in >> u >> v)) throw IoError("truncated edge list");
        g.edges.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(g.edges.begin(), g.edges.end());
    validate_graph(g);
    return g;
}

std::string graph_to_json(const AttributedGraph& g) {
    json j;
    j["n"] = g.n;
    json edges = json::array();
    for (auto [u, v] : g.edges) edges.push_back({u, v});
    j["edges"] = std::move(edges);
    if (!g.features.empty()) j["features"] = g.features;
    if (!g.labels.empty()) j["labels"] = g.labels;
    if (g.virtual_node >= 0) j["virtual_node"] = g.virtual_node;
    if (g.has_edge_flags()) {
        std::vector<int> flags(g.edge_virtual.begin(), g.edge_virtual.end());
        j["edge_virtual"] = flags;
    }
    return j.dump(2) + "\n";
}

AttributedGraph graph_from_json(const std::string& text) {
    json j = json::parse(text);
    AttributedGraph g;
    g.n = j.at("n").get<int>();
    for (const auto& e : j.at("edges")) {
        int u = e.at(0).get<int>(), v = e.at(1).get<int>();
        g.edges.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(g.edges.begin(), g.edges.end());
    if (j.contains("features")) g.features = j["features"].get<std::vector<std::vector<Word>>>();
    if (j.contains("labels")) g.labels = j["labels"].get<std::vector<Word>>();
    if (j.contains("virtual_node")) g.virtual_node = j["virtual_node"].get<int>();
    if (j.contains("edge_virtual")) {
        auto flags = j["edge_virtual"].get<std::vector<int>>();
        g.edge_virtual.assign(flags.begin(), flags.end());
    }
    validate_graph(g);
    return g;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void save_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
}

AttributedGraph load_graph(const std::string& path) {
    std::string text = read_text(path);
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') return graph_from_json(text);
    return graph_from_text(text);
}

std::string colors_to_text(const ColorVector& x) {
    std::ostringstream out;
    for (Word c : x) out << c << '\n';
    return out.str();
}

ColorVector colors_from_text(const std::string& text) {
    std::istringstream in(text);
    ColorVector x;
    Word c = 0;
    while (in >> c) x.push_back(c);
    return x;
}

std::string matrix_to_csv(const DistanceMatrix& m) {
    std::ostringstream out;
    for (int i = 0; i < m.n; ++i) {
        for (int j = 0; j < m.n; ++j) {
            if (j) out << ',';
            out << m(i, j);
        }
        out << '\n';
    }
    return out.str();
}

std::string roundlog_steps_csv(const RoundLog& log) {
    std::ostringstream out;
    out << "round,node,steps\n";
    for (std::size_t r = 0; r < log.steps.size(); ++r)
        for (int u = 0; u < log.n; ++u)
            if (log.steps[r][u] > 0) out << (r + 1) << ',' << u << ',' << log.steps[r][u] << '\n';
    return out.str();
}

std::string roundlog_words_csv(const RoundLog& log) {
    std::ostringstream out;
    out << "round,edge_u,edge_v,direction,words\n";
    for (std::size_t r = 0; r < log.words_sent.size(); ++r)
        for (std::size_t e = 0; e < log.edges.size(); ++e) {
            auto [u, v] = log.edges[e];
            Word fwd = log.words_sent[r][2 * e];
            Word bwd = log.words_sent[r][2 * e + 1];
            if (fwd > 0) out << (r + 1) << ',' << u << ',' << v << ",0," << fwd << '\n';
            if (bwd > 0) out << (r + 1) << ',' << u << ',' << v << ",1," << bwd << '\n';
        }
    return out.str();
}

std::string roundlog_summary_json(const RoundLog& log) {
    json j;
    j["rounds"] = log.rounds;
    j["total_words"] = log.total_words;
    j["peak_node_steps"] = log.peak_node_steps;
    j["n"] = log.n;
    j["w"] = log.w;
    return j.dump(2) + "\n";
}

std::string locality_report_json(const LocalityReport& report) {
    json j;
    j["graphs"] = report.graphs;
    j["edge_accuracy"] = report.edge_accuracy;
    j["node_accuracy"] = report.node_accuracy;
    j["edges_total"] = report.edges_total;
    j["nodes_total"] = report.nodes_total;
    j["edge_mismatches"] = report.edge_mismatches;
    j["node_mismatches"] = report.node_mismatches;
    return j.dump(2) + "\n";
}

std::string locality_report_csv(const LocalityReport& report) {
    std::ostringstream out;
    out << "seed,n_sampled,n,m,edges_all_correct,nodes_all_correct\n";
    for (const auto& r : report.records)
        out << r.seed << ',' << r.n_sampled << ',' << r.n << ',' << r.m << ','
            << (r.edges_all_correct ? 1 : 0) << ',' << (r.nodes_all_correct ? 1 : 0) << '\n';
    return out.str();
}

std::string gadget_roles_json(const GadgetGraph& gg) {
    static const char* names[] = {"xA", "xB", "uA", "uB", "vA", "vB", "wA", "wB", "path"};
    json j;
    json roles = json::array();
    for (GadgetRole r : gg.roles) roles.push_back(names[static_cast<int>(r)]);
    j["roles"] = std::move(roles);
    j["w_a"] = gg.w_a;
    j["w_b"] = gg.w_b;
    j["initial_colors"] = gg.initial_colors;
    return j.dump(2) + "\n";
}

}  // namespace rlc
