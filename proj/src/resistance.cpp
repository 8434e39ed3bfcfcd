#include "rlcongest/resistance.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "rlcongest/prng.hpp"

namespace rlc {

ResistanceMatrix resistance_matrix(const AttributedGraph& g) {
    if (!is_connected(g)) throw ParameterError("resistance distance requires a connected graph");
    auto deg = degrees(g);
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(g.n, g.n);
    for (int u = 0; u < g.n; ++u) lap(u, u) = static_cast<double>(deg[u]);
    for (auto [u, v] : g.edges) {
        lap(u, v) -= 1.0;
        lap(v, u) -= 1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
    const auto& vals = solver.eigenvalues();
    const auto& vecs = solver.eigenvectors();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(g.n);
    for (int i = 0; i < g.n; ++i)
        if (vals(i) > 1e-9) inv(i) = 1.0 / vals(i);
    Eigen::MatrixXd pinv = vecs * inv.asDiagonal() * vecs.transpose();

    ResistanceMatrix R;
    R.n = g.n;
    R.entries.assign(static_cast<std::size_t>(g.n) * g.n, 0.0);
    for (int s = 0; s < g.n; ++s)
        for (int t = s + 1; t < g.n; ++t) {
            double r = pinv(s, s) - 2.0 * pinv(s, t) + pinv(t, t);
            R(s, t) = r;
            R(t, s) = r;
        }
    return R;
}

bool cut_edge_local(const ResistanceMatrix& R, std::pair<int, int> edge, double tol) {
    return std::abs(R(edge.first, edge.second) - 1.0) <= tol;
}

bool cut_vertex_local(const AttributedGraph& g, const ResistanceMatrix& R, int u, double tol) {
    if (u < 0 || u >= g.n) throw ParameterError("node out of range");
    auto adj = adjacency(g);
    const auto& nbrs = adj[u];
    for (std::size_t i = 0; i < nbrs.size(); ++i)
        for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
            int s = nbrs[i], t = nbrs[j];
            if (std::abs(R(s, t) - R(s, u) - R(u, t)) <= tol) return true;
        }
    return false;
}

CutSets cut_sets_tarjan(const AttributedGraph& g) {
    auto adj = adjacency(g);
    CutSets out;
    std::vector<int> disc(g.n, -1), low(g.n, 0);
    int timer = 0;

    struct Frame {
        int u;
        int parent;
        std::size_t next = 0;
        int children = 0;
    };
    for (int start = 0; start < g.n; ++start) {
        if (disc[start] >= 0) continue;
        std::vector<Frame> stack;
        disc[start] = low[start] = timer++;
        stack.push_back({start, -1});
        while (!stack.empty()) {
            Frame& fr = stack.back();
            if (fr.next < adj[fr.u].size()) {
                int v = adj[fr.u][fr.next++];
                if (v == fr.parent) continue;  // unique parent edge in a simple graph
                if (disc[v] >= 0) {
                    low[fr.u] = std::min(low[fr.u], disc[v]);
                } else {
                    disc[v] = low[v] = timer++;
                    ++fr.children;
                    stack.push_back({v, fr.u});
                }
            } else {
                Frame done = fr;
                stack.pop_back();
                if (!stack.empty()) {
                    Frame& par = stack.back();
                    low[par.u] = std::min(low[par.u], low[done.u]);
                    if (low[done.u] > disc[par.u])
                        out.bridges.insert({std::min(par.u, done.u), std::max(par.u, done.u)});
                    if (par.parent >= 0 && low[done.u] >= disc[par.u])
                        out.articulation_points.insert(par.u);
                }
                if (done.parent < 0 && done.children >= 2)
                    out.articulation_points.insert(done.u);
            }
        }
    }
    return out;
}

double spanning_tree_edge_fraction(const AttributedGraph& g, std::pair<int, int> edge) {
    if (g.n > kMatrixTreeMaxN) throw ResourceError("matrix-tree oracle capped at n <= 64");
    if (!is_connected(g)) throw ParameterError("spanning trees require a connected graph");
    if (!std::binary_search(g.edges.begin(), g.edges.end(),
                            std::make_pair(std::min(edge.first, edge.second),
                                           std::max(edge.first, edge.second))))
        throw ParameterError("edge not in graph");

    // log(number of spanning trees) of a weighted multigraph given as a
    // weighted Laplacian, via Cholesky on the first minor.
    auto log_tree_count = [](const Eigen::MatrixXd& lap) {
        int k = static_cast<int>(lap.rows());
        if (k <= 1) return 0.0;  // single node: one (empty) spanning tree
        Eigen::MatrixXd minor = lap.bottomRightCorner(k - 1, k - 1);
        Eigen::LLT<Eigen::MatrixXd> llt(minor);
        if (llt.info() != Eigen::Success)
            throw ResourceError("matrix-tree Cholesky failed");
        double logdet = 0.0;
        for (int i = 0; i < k - 1; ++i) logdet += std::log(llt.matrixL()(i, i));
        return 2.0 * logdet;
    };

    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(g.n, g.n);
    for (auto [u, v] : g.edges) {
        lap(u, u) += 1.0;
        lap(v, v) += 1.0;
        lap(u, v) -= 1.0;
        lap(v, u) -= 1.0;
    }
    double log_total = log_tree_count(lap);

    // Trees containing e = trees of the contraction G/e; contract by merging
    // v into u, keeping parallel edges as weights and dropping the loop.
    int u = std::min(edge.first, edge.second);
    int v = std::max(edge.first, edge.second);
    int k = g.n - 1;
    auto remap = [&](int w) { return w == v ? u : (w > v ? w - 1 : w); };
    Eigen::MatrixXd clap = Eigen::MatrixXd::Zero(k, k);
    for (auto [a, b] : g.edges) {
        int ra = remap(a), rb = remap(b);
        if (ra == rb) continue;
        clap(ra, ra) += 1.0;
        clap(rb, rb) += 1.0;
        clap(ra, rb) -= 1.0;
        clap(rb, ra) -= 1.0;
    }
    double log_with = log_tree_count(clap);
    return std::exp(log_with - log_total);
}

LocalityReport experiment_locality(int count, std::pair<int, int> n_range, double p_numerator,
                                   Word seed, double tol) {
    if (count < 0) throw ParameterError("negative count");
    if (n_range.first < 2 || n_range.second < n_range.first)
        throw ParameterError("bad n range");
    LocalityReport report;
    Prng rng(seed);
    for (int i = 0; i < count; ++i) {
        GraphRecord rec;
        rec.seed = static_cast<Word>(rng.next_u64() >> 1);
        Prng local(rec.seed);
        rec.n_sampled =
            n_range.first + static_cast<int>(local.next_below(n_range.second - n_range.first + 1));
        double p = std::min(1.0, p_numerator / rec.n_sampled);
        AttributedGraph sample = gen_erdos_renyi(rec.n_sampled, p, rec.seed);
        // R is undefined across components; evaluate on the largest one.
        AttributedGraph g = largest_component(sample);
        rec.n = g.n;
        rec.m = g.m();
        if (g.n < 2) {
            rec.edges_all_correct = true;
            rec.nodes_all_correct = true;
            report.records.push_back(rec);
            ++report.graphs;
            continue;
        }
        ResistanceMatrix R = resistance_matrix(g);
        CutSets truth = cut_sets_tarjan(g);

        rec.edges_all_correct = true;
        for (auto e : g.edges) {
            bool predicted = cut_edge_local(R, e, tol);
            bool actual = truth.bridges.count(e) > 0;
            ++report.edges_total;
            if (predicted != actual) {
                ++report.edge_mismatches;
                rec.edges_all_correct = false;
            }
        }
        rec.nodes_all_correct = true;
        for (int u = 0; u < g.n; ++u) {
            bool predicted = cut_vertex_local(g, R, u, tol);
            bool actual = truth.articulation_points.count(u) > 0;
            ++report.nodes_total;
            if (predicted != actual) {
                ++report.node_mismatches;
                rec.nodes_all_correct = false;
            }
        }
        report.records.push_back(rec);
        ++report.graphs;
    }
    if (report.graphs > 0) {
        int edge_ok = 0, node_ok = 0;
        for (const auto& r : report.records) {
            edge_ok += r.edges_all_correct ? 1 : 0;
            node_ok += r.nodes_all_correct ? 1 : 0;
        }
        report.edge_accuracy = static_cast<double>(edge_ok) / report.graphs;
        report.node_accuracy = static_cast<double>(node_ok) / report.graphs;
    }
    return report;
}

}  // namespace rlc
