#include <algorithm>
#include <deque>
#include <numeric>

#include "algos_detail.hpp"
#include "rlcongest/algos.hpp"

namespace rlc {

using detail::FieldPacker;
using detail::bits_for;

Word tree_depth(const SpanningTreeState& tree) {
    Word d = 0;
    for (Word x : tree.depth) d = std::max(d, x);
    return d;
}

void validate_tree(const AttributedGraph& g, const SpanningTreeState& tree) {
    if (static_cast<int>(tree.parent.size()) != g.n ||
        static_cast<int>(tree.depth.size()) != g.n)
        throw ParameterError("tree arrays sized differently from graph");
    if (tree.root < 0 || tree.root >= g.n) throw ParameterError("root out of range");
    if (tree.parent[tree.root] != -1 || tree.depth[tree.root] != 0)
        throw ParameterError("root must have parent -1 and depth 0");
    auto adj = adjacency(g);
    for (int u = 0; u < g.n; ++u) {
        if (u == tree.root) continue;
        int p = tree.parent[u];
        if (p < 0 || p >= g.n) throw ParameterError("missing parent");
        if (!std::binary_search(adj[u].begin(), adj[u].end(), p))
            throw ParameterError("parent is not a neighbor");
        if (tree.depth[u] != tree.depth[p] + 1)
            throw ParameterError("depth not parent depth + 1");
    }
}

namespace {

// ---------------------------------------------------------------------------
// Flood

struct FloodProgram {
    int root;

    struct State {
        bool adopted = false;
        int parent = -1;
        Word depth = -1;
    };

    State init(const NodeContext& ctx) const {
        State st;
        if (ctx.node == root) {
            st.adopted = true;
            st.depth = 0;
        }
        return st;
    }

    bool on_round(State& st, const NodeContext& ctx, RoundApi& api) const {
        if (ctx.node == root) {
            for (int j = 0; j < ctx.degree(); ++j) api.send(j, Word{0});
            api.meter().charge(StepKind::Write, ctx.degree());
            return true;
        }
        if (!st.adopted) {
            int best = -1;
            Word best_depth = 0;
            for (int j = 0; j < ctx.degree(); ++j) {
                const Message& in = api.inbox(j);
                if (in.empty()) continue;
                api.meter().step(StepKind::Read);
                Word d = in[0];
                api.meter().step(StepKind::Compare);
                if (best < 0 || d < best_depth ||
                    (d == best_depth && ctx.neighbor(j) < best)) {
                    best = ctx.neighbor(j);
                    best_depth = d;
                }
            }
            if (best >= 0) {
                st.adopted = true;
                st.parent = best;
                st.depth = best_depth + 1;
                for (int j = 0; j < ctx.degree(); ++j) api.send(j, st.depth);
                api.meter().charge(StepKind::Write, ctx.degree());
                return true;
            }
        }
        return false;
    }
};

}  // namespace

FloodResult flood_bfs(const AttributedGraph& g, int root, int w, Word max_rounds) {
    if (root < 0 || root >= g.n) throw ParameterError("root out of range");
    FloodProgram prog{root};
    auto run = run_node_program(g, prog, w, StepBudget::time_n_delta_log_n(), max_rounds);
    FloodResult out;
    out.status = run.status;
    out.log = std::move(run.log);
    out.tree.root = root;
    out.tree.parent.resize(g.n, -1);
    out.tree.depth.resize(g.n, -1);
    for (int u = 0; u < g.n; ++u) {
        out.tree.parent[u] = run.states[u].parent;
        out.tree.depth[u] = run.states[u].depth;
    }
    return out;
}

namespace {

// ---------------------------------------------------------------------------
// Upcast

struct UpcastProgram {
    const SpanningTreeState* tree;
    const std::vector<WordList>* tokens;
    const std::vector<Word>* subtree_words;  // own + all descendants

    struct State {
        std::deque<Word> queue;
        Word forwarded = 0;
        WordList at_root;
        int parent_index = -1;
        std::vector<char> is_child;
    };

    State init(const NodeContext& ctx) const {
        State st;
        int u = ctx.node;
        st.is_child.resize(ctx.degree(), 0);
        for (int j = 0; j < ctx.degree(); ++j)
            if (tree->parent[ctx.neighbor(j)] == u) st.is_child[j] = 1;
        if (u != tree->root) st.parent_index = ctx.neighbor_index(tree->parent[u]);
        const WordList& own = (*tokens)[u];
        if (u == tree->root)
            st.at_root = own;
        else
            st.queue.assign(own.begin(), own.end());
        return st;
    }

    bool on_round(State& st, const NodeContext& ctx, RoundApi& api) const {
        for (int j = 0; j < ctx.degree(); ++j) {
            if (!st.is_child[j]) continue;
            const Message& in = api.inbox(j);
            api.meter().charge(StepKind::Read, static_cast<long long>(in.size()));
            if (ctx.node == tree->root)
                st.at_root.insert(st.at_root.end(), in.begin(), in.end());
            else
                st.queue.insert(st.queue.end(), in.begin(), in.end());
        }
        if (ctx.node == tree->root)
            return static_cast<Word>(st.at_root.size()) == (*subtree_words)[ctx.node];
        int sent = 0;
        while (!st.queue.empty() && sent < ctx.w) {
            api.send(st.parent_index, st.queue.front());
            st.queue.pop_front();
            ++sent;
            ++st.forwarded;
        }
        api.meter().charge(StepKind::Write, sent);
        return st.forwarded == (*subtree_words)[ctx.node];
    }
};

}  // namespace

UpcastResult upcast(const AttributedGraph& g, const SpanningTreeState& tree,
                    const std::vector<WordList>& tokens_per_node, int w, Word max_rounds) {
    validate_tree(g, tree);
    if (static_cast<int>(tokens_per_node.size()) != g.n)
        throw ParameterError("token list count != node count");
    // Subtree word counts let every node detect locally when its stream is done.
    std::vector<Word> subtree(g.n, 0);
    for (int u = 0; u < g.n; ++u) subtree[u] = static_cast<Word>(tokens_per_node[u].size());
    std::vector<int> order(g.n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return tree.depth[a] > tree.depth[b]; });
    for (int u : order)
        if (u != tree.root) subtree[tree.parent[u]] += subtree[u];

    UpcastProgram prog{&tree, &tokens_per_node, &subtree};
    auto run = run_node_program(g, prog, w, StepBudget::time_n_delta_log_n(), max_rounds);
    if (run.status == RunStatus::Timeout) throw ResourceError("upcast timed out");
    UpcastResult out;
    out.log = std::move(run.log);
    out.tokens_at_root = std::move(run.states[tree.root].at_root);
    return out;
}

namespace {

// ---------------------------------------------------------------------------
// Downcast

struct DowncastProgram {
    const SpanningTreeState* tree;
    FieldPacker packer;
    int f_dst = 0, f_payload = 0;
    WordList root_stream;  // packed words broadcast to everyone
    Word stream_len = 0;

    struct State {
        WordList buffer;
        std::vector<int> child_index;
        std::vector<Word> cursor;
        WordList delivered;
        Word received = 0;
        int parent_index = -1;
    };

    State init(const NodeContext& ctx) const {
        State st;
        int u = ctx.node;
        for (int j = 0; j < ctx.degree(); ++j)
            if (tree->parent[ctx.neighbor(j)] == u) st.child_index.push_back(j);
        st.cursor.assign(st.child_index.size(), 0);
        if (u == tree->root)
            st.buffer = root_stream;
        else
            st.parent_index = ctx.neighbor_index(tree->parent[u]);
        return st;
    }

    bool on_round(State& st, const NodeContext& ctx, RoundApi& api) const {
        if (st.parent_index >= 0) {
            const Message& in = api.inbox(st.parent_index);
            for (Word word : in) {
                api.meter().step(StepKind::Read);
                if (packer.get(word, f_dst) == ctx.node)
                    st.delivered.push_back(packer.get(word, f_payload));
                st.buffer.push_back(word);
                ++st.received;
            }
        }
        bool all_sent = true;
        for (std::size_t c = 0; c < st.child_index.size(); ++c) {
            Word& cur = st.cursor[c];
            int sent = 0;
            while (cur < static_cast<Word>(st.buffer.size()) && sent < ctx.w) {
                api.send(st.child_index[c], st.buffer[cur]);
                ++cur;
                ++sent;
            }
            api.meter().charge(StepKind::Write, sent);
            if (cur < stream_len) all_sent = false;
        }
        Word expected = ctx.node == tree->root ? stream_len : stream_len - 0;
        bool have_all = ctx.node == tree->root || st.received == expected;
        return have_all && all_sent;
    }
};

}  // namespace

DowncastResult downcast(const AttributedGraph& g, const SpanningTreeState& tree,
                        const std::vector<std::pair<int, Word>>& messages_at_root, int w,
                        Word max_rounds) {
    validate_tree(g, tree);
    DowncastProgram prog;
    prog.tree = &tree;
    int idbits = bits_for(std::max(g.n - 1, 1));
    prog.f_dst = prog.packer.add(idbits);
    prog.f_payload = prog.packer.add(62 - idbits);
    Word payload_cap = Word{1} << (62 - idbits);

    DowncastResult out;
    out.delivered.resize(g.n);
    for (auto [dst, payload] : messages_at_root) {
        if (dst < 0 || dst >= g.n) throw ParameterError("message destination out of range");
        if (payload < 0 || payload >= payload_cap)
            throw ParameterError("payload does not fit the packed message format");
        if (dst == tree.root)
            out.delivered[dst].push_back(payload);  // kept locally, never transmitted
        else
            prog.root_stream.push_back(
                prog.packer.pack({static_cast<Word>(dst), payload}));
    }
    prog.stream_len = static_cast<Word>(prog.root_stream.size());

    auto run = run_node_program(g, prog, w, StepBudget::time_n_delta_log_n(), max_rounds);
    if (run.status == RunStatus::Timeout) throw ResourceError("downcast timed out");
    out.log = std::move(run.log);
    for (int u = 0; u < g.n; ++u) {
        auto& got = run.states[u].delivered;
        out.delivered[u].insert(out.delivered[u].end(), got.begin(), got.end());
    }
    return out;
}

namespace {

// ---------------------------------------------------------------------------
// Distributed WL step (collect at BFS root, rank there, route colors back).
//
// Wire protocol, per directed edge: the first word is always the flood
// announce (depth, parent). On child->parent edges a record stream follows:
// parent records (kind 1 | z | p | x_z | deg_z) and non-tree edge records
// (kind 0 | a | b), one word each. On parent->child edges a packed stream of
// (z, y_z) result records follows, several per word.

struct WlCongestProgram {
    int root = 0;
    int n = 0;
    const ColorVector* colors = nullptr;

    FieldPacker announce;
    int a_depth = 0, a_parent = 0;

    FieldPacker rec;
    int r_kind = 0, r_a = 0, r_b = 0, r_color = 0, r_deg = 0;

    FieldPacker down;
    int down_per_word = 0;
    std::vector<int> d_id, d_rank;

    void configure(int n_nodes, Word max_color) {
        n = n_nodes;
        int idbits = bits_for(std::max(n - 1, 1));
        int depthbits = bits_for(std::max(n, 2));
        int colorbits = bits_for(std::max<Word>(max_color, 1));
        a_depth = announce.add(depthbits);
        a_parent = announce.add(idbits);
        r_kind = rec.add(1);
        r_a = rec.add(idbits);
        r_b = rec.add(idbits);
        r_color = rec.add(colorbits);
        r_deg = rec.add(idbits + 1);
        int rankbits = bits_for(n);
        down_per_word = std::max(1, 62 / (idbits + rankbits));
        for (int i = 0; i < down_per_word; ++i) {
            d_id.push_back(down.add(idbits));
            d_rank.push_back(down.add(rankbits));
        }
    }

    struct DownRec {
        int id;
        Word rank;
    };

    struct State {
        bool adopted = false;
        Word depth = 0;
        int parent = -1;
        int parent_index = -1;
        bool announced = false;
        int announces_pending = 0;
        std::vector<char> nbr_announced;
        std::vector<char> nbr_is_child;
        bool nontree_enqueued = false;
        std::deque<Word> up_queue;

        // Subtree bookkeeping learned from relayed parent records.
        std::vector<int> down_child_of;          // node id -> child edge index
        std::vector<Word> expected_down;         // per edge index
        std::vector<Word> sent_down;             // per edge index
        std::vector<std::deque<DownRec>> down_queue;  // per edge index

        // Root-only collection.
        Word parent_recs = 0;
        Word edge_recs = 0;
        Word degree_sum = 0;
        std::vector<std::pair<int, int>> edges;
        ColorVector xs;
        bool computed = false;

        Word my_color = -1;
        bool got_color = false;
    };

    State init(const NodeContext& ctx) const {
        State st;
        st.nbr_announced.assign(ctx.degree(), 0);
        st.nbr_is_child.assign(ctx.degree(), 0);
        st.announces_pending = ctx.degree();
        st.expected_down.assign(ctx.degree(), 0);
        st.sent_down.assign(ctx.degree(), 0);
        st.down_queue.resize(ctx.degree());
        if (ctx.node == root) {
            st.adopted = true;
            st.depth = 0;
            st.down_child_of.assign(n, -1);
            st.xs.assign(n, -1);
            st.xs[root] = (*colors)[root];
            st.degree_sum = ctx.degree();
        }
        return st;
    }

    void absorb_announce(State& st, const NodeContext& ctx, RoundApi& api, int j, Word word) const {
        st.nbr_announced[j] = 1;
        --st.announces_pending;
        Word nbr_parent = announce.get(word, a_parent);
        if (nbr_parent == static_cast<Word>(ctx.node)) {
            st.nbr_is_child[j] = 1;
            if (st.down_child_of.empty()) st.down_child_of.assign(n, -1);
        }
        api.meter().charge(StepKind::WordOp, 2);
    }

    void absorb_record(State& st, const NodeContext& ctx, RoundApi& api, int j, Word word) const {
        bool is_parent_rec = rec.get(word, r_kind) == 1;
        api.meter().charge(StepKind::WordOp, 2);
        if (is_parent_rec) {
            int z = static_cast<int>(rec.get(word, r_a));
            st.down_child_of[z] = j;
            ++st.expected_down[j];
        }
        if (ctx.node == root) {
            if (is_parent_rec) {
                int z = static_cast<int>(rec.get(word, r_a));
                int p = static_cast<int>(rec.get(word, r_b));
                st.xs[z] = rec.get(word, r_color);
                st.degree_sum += rec.get(word, r_deg);
                st.edges.emplace_back(std::min(z, p), std::max(z, p));
                ++st.parent_recs;
            } else {
                int a = static_cast<int>(rec.get(word, r_a));
                int b = static_cast<int>(rec.get(word, r_b));
                st.edges.emplace_back(std::min(a, b), std::max(a, b));
                ++st.edge_recs;
            }
            api.meter().charge(StepKind::WordOp, 4);
        } else {
            st.up_queue.push_back(word);
        }
    }

    // Rank the reconstructed WL types; this is the metered centralized sort.
    void root_compute(State& st, const NodeContext& ctx, RoundApi& api) const {
        auto& meter = api.meter();
        std::vector<WordList> nbr_colors(n);
        for (auto [a, b] : st.edges) {
            nbr_colors[a].push_back(st.xs[b]);
            nbr_colors[b].push_back(st.xs[a]);
            meter.charge(StepKind::Write, 2);
        }
        std::vector<WordList> keys(n);
        for (int u = 0; u < n; ++u) {
            WordList& key = keys[u];
            key.reserve(nbr_colors[u].size() + 1);
            key.push_back(st.xs[u]);
            metered_stable_sort(nbr_colors[u], [&](Word a, Word b) {
                meter.step(StepKind::Compare);
                return a < b;
            });
            key.insert(key.end(), nbr_colors[u].begin(), nbr_colors[u].end());
            meter.charge(StepKind::Write, static_cast<long long>(key.size()));
        }
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        metered_stable_sort(order, [&](int a, int b) {
            return lex_compare(keys[a], keys[b], meter) < 0;
        });
        std::vector<Word> ranks(n);
        Word rank = 0;
        for (int i = 0; i < n; ++i) {
            if (i == 0 || lex_compare(keys[order[i - 1]], keys[order[i]], meter) != 0) ++rank;
            ranks[order[i]] = rank;
        }
        st.my_color = ranks[root];
        st.got_color = true;
        for (int z = 0; z < n; ++z) {
            if (z == root) continue;
            int j = st.down_child_of[z];
            st.down_queue[j].push_back({z, ranks[z]});
            meter.step(StepKind::Write);
        }
        st.computed = true;
    }

    bool on_round(State& st, const NodeContext& ctx, RoundApi& api) const {
        // Absorb inboxes: first-ever word on an edge is the announce.
        std::vector<std::pair<Word, int>> offers;  // (depth, neighbor) for adoption
        for (int j = 0; j < ctx.degree(); ++j) {
            const Message& in = api.inbox(j);
            std::size_t pos = 0;
            if (!in.empty() && !st.nbr_announced[j]) {
                if (!st.adopted)
                    offers.emplace_back(announce.get(in[0], a_depth), ctx.neighbor(j));
                absorb_announce(st, ctx, api, j, in[0]);
                pos = 1;
            }
            if (st.parent_index == j) {
                // Packed result records from the parent.
                for (; pos < in.size(); ++pos) {
                    Word word = in[pos];
                    for (int s = 0; s < down_per_word; ++s) {
                        int z = static_cast<int>(down.get(word, d_id[s]));
                        if (z == root) continue;  // padding slot
                        Word rk = down.get(word, d_rank[s]);
                        if (z == ctx.node) {
                            st.my_color = rk;
                            st.got_color = true;
                        } else {
                            st.down_queue[st.down_child_of[z]].push_back({z, rk});
                        }
                        api.meter().charge(StepKind::WordOp, 2);
                    }
                }
            } else {
                for (; pos < in.size(); ++pos) absorb_record(st, ctx, api, j, in[pos]);
            }
        }

        if (!st.adopted) {
            if (offers.empty()) return false;
            auto best = *std::min_element(offers.begin(), offers.end());
            st.adopted = true;
            st.depth = best.first + 1;
            st.parent = best.second;
            st.parent_index = ctx.neighbor_index(st.parent);
        }

        int budget = ctx.w;
        if (!st.announced) {
            // Announce round: one word to every neighbor, nothing else.
            Word word = announce.pack({st.depth, static_cast<Word>(
                                                     st.parent < 0 ? ctx.node : st.parent)});
            for (int j = 0; j < ctx.degree(); ++j) api.send(j, word);
            api.meter().charge(StepKind::Write, ctx.degree());
            st.announced = true;
            if (ctx.node != root) {
                Word deg = ctx.degree();
                st.up_queue.push_front(rec.pack({1, static_cast<Word>(ctx.node),
                                                 static_cast<Word>(st.parent),
                                                 (*colors)[ctx.node], deg}));
            }
            return false;
        }

        // Once every neighbor has announced, the non-tree edges owned here
        // (u < v, neither endpoint the other's parent) are known.
        if (!st.nontree_enqueued && st.announces_pending == 0) {
            st.nontree_enqueued = true;
            for (int j = 0; j < ctx.degree(); ++j) {
                int v = ctx.neighbor(j);
                if (v < ctx.node) continue;
                if (st.nbr_is_child[j] || v == st.parent) continue;
                st.up_queue.push_back(
                    rec.pack({0, static_cast<Word>(ctx.node), static_cast<Word>(v), 0, 0}));
                api.meter().step(StepKind::Write);
            }
        }

        if (ctx.node == root) {
            if (!st.computed && st.parent_recs == n - 1) {
                Word m_hat = st.degree_sum / 2;
                if (st.edge_recs == m_hat - (n - 1)) root_compute(st, ctx, api);
            }
            if (n == 1 && !st.computed) root_compute(st, ctx, api);
        } else {
            int sent = 0;
            while (!st.up_queue.empty() && sent < budget) {
                api.send(st.parent_index, st.up_queue.front());
                st.up_queue.pop_front();
                ++sent;
            }
            api.meter().charge(StepKind::Write, sent);
        }

        // Forward packed result records downward.
        bool down_done = true;
        for (int j = 0; j < ctx.degree(); ++j) {
            if (!st.nbr_is_child[j]) continue;
            auto& q = st.down_queue[j];
            int words = 0;
            while (!q.empty() && words < budget) {
                std::vector<Word> fields;
                for (int s = 0; s < down_per_word && !q.empty(); ++s) {
                    fields.push_back(q.front().id);
                    fields.push_back(q.front().rank);
                    ++st.sent_down[j];
                    q.pop_front();
                }
                while (static_cast<int>(fields.size()) < 2 * down_per_word) {
                    fields.push_back(root);  // padding: the root is never addressed
                    fields.push_back(0);
                }
                api.send(j, down.pack(fields));
                api.meter().step(StepKind::Write);
                ++words;
            }
            if (st.sent_down[j] < st.expected_down[j] || !q.empty()) down_done = false;
        }

        bool up_done = ctx.node == root ? st.computed : st.up_queue.empty() && st.nontree_enqueued;
        return st.got_color && down_done && up_done;
    }
};

}  // namespace

WlCongestResult wl_congest(const AttributedGraph& g, const ColorVector& x, int w, Word max_rounds,
                           int num_threads) {
    validate_colors(g, x);
    if (!is_connected(g)) throw ParameterError("wl_congest requires a connected graph");
    if (static_cast<int>(g.labels.size()) != g.n)
        throw ParameterError("wl_congest requires unique IDs (run assign_unique_ids)");
    for (int u = 0; u < g.n; ++u)
        if (g.labels[u] != u) throw ParameterError("labels must equal node indices");

    WlCongestProgram prog;
    prog.root = 0;
    prog.colors = &x;
    Word max_color = 1;
    for (Word c : x) max_color = std::max(max_color, c);
    prog.configure(g.n, max_color);

    auto run = run_node_program(g, prog, w, StepBudget::time_n_delta_log_n(), max_rounds,
                                num_threads);
    if (run.status == RunStatus::Timeout) throw ResourceError("wl_congest timed out");
    WlCongestResult out;
    out.log = std::move(run.log);
    out.colors.resize(g.n);
    for (int u = 0; u < g.n; ++u) out.colors[u] = run.states[u].my_color;
    return out;
}

namespace {

// ---------------------------------------------------------------------------
// Collect-compute-broadcast (the most-global algorithm). Same tree protocol
// as the WL step, but parent records carry raw feature words and the result
// stream is unpacked (z, result) word pairs, so f's outputs are unconstrained.

struct GlobalComputeProgram {
    int root = 0;
    int n = 0;
    int feat_width = 0;
    const std::function<std::vector<Word>(const AttributedGraph&)>* f = nullptr;
    const AttributedGraph* graph = nullptr;

    FieldPacker announce;
    int a_depth = 0, a_parent = 0;
    FieldPacker rec;
    int r_kind = 0, r_a = 0, r_b = 0, r_deg = 0;

    void configure(int n_nodes, int features) {
        n = n_nodes;
        feat_width = features;
        int idbits = bits_for(std::max(n - 1, 1));
        a_depth = announce.add(bits_for(std::max(n, 2)));
        a_parent = announce.add(idbits);
        r_kind = rec.add(1);
        r_a = rec.add(idbits);
        r_b = rec.add(idbits);
        r_deg = rec.add(idbits + 1);
    }

    struct State {
        bool adopted = false, announced = false, nontree_enqueued = false;
        Word depth = 0;
        int parent = -1, parent_index = -1;
        int announces_pending = 0;
        std::vector<char> nbr_announced, nbr_is_child;
        std::deque<Word> up_queue;

        // Record-frame assembly per child edge (parent records span words).
        std::vector<WordList> partial;
        std::vector<int> partial_need;

        std::vector<int> down_child_of;
        std::vector<Word> expected_down;       // records per child edge
        std::vector<Word> sent_down_words;     // words already streamed per child edge
        std::vector<std::deque<Word>> down_queue;  // flattened (z, result) pairs
        WordList down_partial;  // possibly half of a (z, result) pair

        Word parent_recs = 0, edge_recs = 0, degree_sum = 0;
        std::vector<std::pair<int, int>> edges;
        std::vector<WordList> feats;
        bool computed = false;

        Word my_result = -1;
        bool got_result = false;
    };

    State init(const NodeContext& ctx) const {
        State st;
        st.nbr_announced.assign(ctx.degree(), 0);
        st.nbr_is_child.assign(ctx.degree(), 0);
        st.announces_pending = ctx.degree();
        st.partial.resize(ctx.degree());
        st.partial_need.assign(ctx.degree(), 0);
        st.expected_down.assign(ctx.degree(), 0);
        st.sent_down_words.assign(ctx.degree(), 0);
        st.down_queue.resize(ctx.degree());
        if (ctx.node == root) {
            st.adopted = true;
            st.down_child_of.assign(n, -1);
            st.feats.resize(n);
            st.degree_sum = ctx.degree();
        }
        return st;
    }

    WordList own_features(const NodeContext& ctx) const {
        WordList out(feat_width, 0);
        if (ctx.features)
            for (int i = 0; i < feat_width; ++i) out[i] = (*ctx.features)[i];
        return out;
    }

    void complete_record(State& st, const NodeContext& ctx, RoundApi& api, int j,
                         const WordList& frame) const {
        Word head = frame[0];
        bool is_parent_rec = rec.get(head, r_kind) == 1;
        if (is_parent_rec) {
            int z = static_cast<int>(rec.get(head, r_a));
            st.down_child_of[z] = j;
            ++st.expected_down[j];
        }
        if (ctx.node == root) {
            int a = static_cast<int>(rec.get(head, r_a));
            int b = static_cast<int>(rec.get(head, r_b));
            st.edges.emplace_back(std::min(a, b), std::max(a, b));
            if (is_parent_rec) {
                st.degree_sum += rec.get(head, r_deg);
                st.feats[a].assign(frame.begin() + 1, frame.end());
                ++st.parent_recs;
            } else {
                ++st.edge_recs;
            }
        } else {
            for (Word word : frame) st.up_queue.push_back(word);
        }
        api.meter().charge(StepKind::WordOp, static_cast<long long>(frame.size()));
    }

    void root_compute(State& st, const NodeContext& ctx, RoundApi& api) const {
        AttributedGraph assembled;
        assembled.n = n;
        assembled.edges = st.edges;
        std::sort(assembled.edges.begin(), assembled.edges.end());
        if (feat_width > 0) {
            st.feats[root] = own_features(ctx);
            assembled.features = st.feats;
        }
        std::vector<Word> results = (*f)(assembled);
        if (static_cast<int>(results.size()) != n)
            throw ParameterError("centralized function must return one word per node");
        st.my_result = results[root];
        st.got_result = true;
        for (int z = 0; z < n; ++z) {
            if (z == root) continue;
            auto& q = st.down_queue[st.down_child_of[z]];
            q.push_back(static_cast<Word>(z));
            q.push_back(results[z]);
        }
        st.computed = true;
    }

    bool on_round(State& st, const NodeContext& ctx, RoundApi& api) const {
        std::vector<std::pair<Word, int>> offers;
        for (int j = 0; j < ctx.degree(); ++j) {
            const Message& in = api.inbox(j);
            std::size_t pos = 0;
            if (!in.empty() && !st.nbr_announced[j]) {
                if (!st.adopted)
                    offers.emplace_back(announce.get(in[0], a_depth), ctx.neighbor(j));
                st.nbr_announced[j] = 1;
                --st.announces_pending;
                if (announce.get(in[0], a_parent) == static_cast<Word>(ctx.node)) {
                    st.nbr_is_child[j] = 1;
                    if (st.down_child_of.empty()) st.down_child_of.assign(n, -1);
                }
                pos = 1;
            }
            if (st.parent_index == j) {
                for (; pos < in.size(); ++pos) {
                    st.down_partial.push_back(in[pos]);
                    if (st.down_partial.size() == 2) {
                        int z = static_cast<int>(st.down_partial[0]);
                        Word result = st.down_partial[1];
                        st.down_partial.clear();
                        if (z == ctx.node) {
                            st.my_result = result;
                            st.got_result = true;
                        } else {
                            auto& q = st.down_queue[st.down_child_of[z]];
                            q.push_back(static_cast<Word>(z));
                            q.push_back(result);
                        }
                    }
                }
            } else {
                for (; pos < in.size(); ++pos) {
                    auto& frame = st.partial[j];
                    frame.push_back(in[pos]);
                    if (frame.size() == 1)
                        st.partial_need[j] =
                            rec.get(frame[0], r_kind) == 1 ? 1 + feat_width : 1;
                    if (static_cast<int>(frame.size()) == st.partial_need[j]) {
                        complete_record(st, ctx, api, j, frame);
                        frame.clear();
                    }
                }
            }
        }

        if (!st.adopted) {
            if (offers.empty()) return false;
            auto best = *std::min_element(offers.begin(), offers.end());
            st.adopted = true;
            st.depth = best.first + 1;
            st.parent = best.second;
            st.parent_index = ctx.neighbor_index(st.parent);
        }
        if (!st.announced) {
            Word word = announce.pack(
                {st.depth, static_cast<Word>(st.parent < 0 ? ctx.node : st.parent)});
            for (int j = 0; j < ctx.degree(); ++j) api.send(j, word);
            st.announced = true;
            if (ctx.node != root) {
                WordList frame{rec.pack({1, static_cast<Word>(ctx.node),
                                         static_cast<Word>(st.parent),
                                         static_cast<Word>(ctx.degree())})};
                WordList feats = own_features(ctx);
                frame.insert(frame.end(), feats.begin(), feats.end());
                st.up_queue.insert(st.up_queue.begin(), frame.begin(), frame.end());
            }
            return false;
        }
        if (!st.nontree_enqueued && st.announces_pending == 0) {
            st.nontree_enqueued = true;
            for (int j = 0; j < ctx.degree(); ++j) {
                int v = ctx.neighbor(j);
                if (v < ctx.node || st.nbr_is_child[j] || v == st.parent) continue;
                st.up_queue.push_back(
                    rec.pack({0, static_cast<Word>(ctx.node), static_cast<Word>(v), 0}));
            }
        }

        if (ctx.node == root) {
            if (!st.computed && st.parent_recs == n - 1) {
                Word m_hat = st.degree_sum / 2;
                if (st.edge_recs == m_hat - (n - 1)) root_compute(st, ctx, api);
            }
            if (n == 1 && !st.computed) root_compute(st, ctx, api);
        } else {
            int sent = 0;
            while (!st.up_queue.empty() && sent < ctx.w) {
                api.send(st.parent_index, st.up_queue.front());
                st.up_queue.pop_front();
                ++sent;
            }
            api.meter().charge(StepKind::Write, sent);
        }

        bool down_done = true;
        for (int j = 0; j < ctx.degree(); ++j) {
            if (!st.nbr_is_child[j]) continue;
            auto& q = st.down_queue[j];
            int sent = 0;
            while (!q.empty() && sent < ctx.w) {
                api.send(j, q.front());
                q.pop_front();
                ++st.sent_down_words[j];
                ++sent;
            }
            api.meter().charge(StepKind::Write, sent);
            if (st.sent_down_words[j] < 2 * st.expected_down[j]) down_done = false;
        }

        bool up_done = ctx.node == root ? st.computed : st.up_queue.empty() && st.nontree_enqueued;
        return st.got_result && down_done && up_done;
    }
};

}  // namespace

GlobalComputeResult global_compute(
    const AttributedGraph& g, const std::function<std::vector<Word>(const AttributedGraph&)>& f,
    int w, Word max_rounds) {
    if (!is_connected(g)) throw ParameterError("global_compute requires a connected graph");
    if (static_cast<int>(g.labels.size()) != g.n)
        throw ParameterError("global_compute requires unique IDs");
    for (int u = 0; u < g.n; ++u)
        if (g.labels[u] != u) throw ParameterError("labels must equal node indices");

    GlobalComputeProgram prog;
    prog.root = 0;
    prog.f = &f;
    prog.graph = &g;
    prog.configure(g.n, g.features.empty() ? 0 : static_cast<int>(g.features.front().size()));

    auto run = run_node_program(g, prog, w, StepBudget::unbounded(), max_rounds);
    if (run.status == RunStatus::Timeout) throw ResourceError("global_compute timed out");
    GlobalComputeResult out;
    out.log = std::move(run.log);
    out.results.resize(g.n);
    for (int u = 0; u < g.n; ++u) out.results[u] = run.states[u].my_result;
    return out;
}

namespace {

// ---------------------------------------------------------------------------
// WL step with a virtual node: everyone ships its type to the virtual hub,
// which ranks and answers. Round count depends on the original max degree
// only, never on the diameter.

struct VirtualNodeProgram {
    int vn = 0;
    int n_total = 0;  // including the virtual node
    const ColorVector* colors = nullptr;

    FieldPacker header;
    int h_color = 0, h_deg = 0;

    static constexpr Word kNotify = -1;

    struct State {
        int vn_index = -1;       // edge index toward the virtual node
        WordList stream;         // outgoing: header then neighbor colors
        std::size_t cursor = 0;
        Word my_color = -1;
        bool got_color = false;

        // Virtual-node collection.
        std::vector<WordList> types;     // per edge: [x_u, sorted neighbor colors...]
        std::vector<Word> need;          // words still expected per edge (-1 = header pending)
        int streams_done = 0;
        bool replied = false;
    };

    State init(const NodeContext& ctx) const {
        State st;
        if (ctx.node == vn) {
            st.types.resize(ctx.degree());
            st.need.assign(ctx.degree(), -1);
        }
        return st;
    }

    bool on_round(State& st, const NodeContext& ctx, RoundApi& api) const {
        auto& meter = api.meter();
        if (ctx.node == vn) {
            if (api.round() == 1) {
                for (int j = 0; j < ctx.degree(); ++j) api.send(j, kNotify);
                meter.charge(StepKind::Write, ctx.degree());
                return ctx.degree() == 0;
            }
            if (api.round() == 2) return false;  // round-1 color broadcasts; streams start next round
            for (int j = 0; j < ctx.degree(); ++j) {
                for (Word word : api.inbox(j)) {
                    meter.step(StepKind::Read);
                    if (st.need[j] == -1) {
                        st.types[j].push_back(header.get(word, h_color));
                        st.need[j] = header.get(word, h_deg);
                        if (st.need[j] == 0) ++st.streams_done;
                    } else if (st.need[j] > 0) {
                        st.types[j].push_back(word);
                        if (--st.need[j] == 0) ++st.streams_done;
                    }
                }
            }
            if (!st.replied && st.streams_done == ctx.degree()) {
                // Sort each type's neighbor multiset, rank all types, reply.
                for (auto& t : st.types) {
                    std::vector<Word> tail(t.begin() + 1, t.end());
                    metered_stable_sort(tail, [&](Word a, Word b) {
                        meter.step(StepKind::Compare);
                        return a < b;
                    });
                    std::copy(tail.begin(), tail.end(), t.begin() + 1);
                }
                std::vector<int> order(ctx.degree());
                std::iota(order.begin(), order.end(), 0);
                metered_stable_sort(order, [&](int a, int b) {
                    return lex_compare(st.types[a], st.types[b], meter) < 0;
                });
                Word rank = 0;
                std::vector<Word> ranks(ctx.degree());
                for (int i = 0; i < ctx.degree(); ++i) {
                    if (i == 0 ||
                        lex_compare(st.types[order[i - 1]], st.types[order[i]], meter) != 0)
                        ++rank;
                    ranks[order[i]] = rank;
                }
                for (int j = 0; j < ctx.degree(); ++j) api.send(j, ranks[j]);
                meter.charge(StepKind::Write, ctx.degree());
                st.replied = true;
                return true;
            }
            return false;
        }

        // Original nodes.
        if (api.round() == 1) {
            for (int j = 0; j < ctx.degree(); ++j) api.send(j, (*colors)[ctx.node]);
            meter.charge(StepKind::Write, ctx.degree());
            return false;
        }
        if (api.round() == 2) {
            WordList nbr_colors;
            for (int j = 0; j < ctx.degree(); ++j) {
                const Message& in = api.inbox(j);
                meter.step(StepKind::Read);
                if (!in.empty() && in[0] == kNotify)
                    st.vn_index = j;
                else if (!in.empty())
                    nbr_colors.push_back(in[0]);
            }
            if (st.vn_index < 0) throw ParameterError("virtual node never notified");
            st.stream.push_back(header.pack({(*colors)[ctx.node],
                                             static_cast<Word>(nbr_colors.size())}));
            st.stream.insert(st.stream.end(), nbr_colors.begin(), nbr_colors.end());
        }
        if (st.cursor < st.stream.size()) {
            int sent = 0;
            while (st.cursor < st.stream.size() && sent < ctx.w) {
                api.send(st.vn_index, st.stream[st.cursor++]);
                ++sent;
            }
            meter.charge(StepKind::Write, sent);
            return false;
        }
        if (st.vn_index >= 0) {
            const Message& in = api.inbox(st.vn_index);
            if (!in.empty() && st.cursor == st.stream.size() && !st.got_color &&
                api.round() > 2) {
                st.my_color = in[0];
                st.got_color = true;
                return true;
            }
        }
        return false;
    }
};

}  // namespace

WlCongestResult wl_virtual_node(const AttributedGraph& g_with_virtual, const ColorVector& x,
                                int w, Word max_rounds) {
    const AttributedGraph& g = g_with_virtual;
    if (g.virtual_node < 0) throw ParameterError("missing virtual node marker");
    int vn = g.virtual_node;
    if (static_cast<int>(x.size()) != g.n - 1)
        throw ParameterError("colors must cover exactly the original nodes");
    Word cap = static_cast<Word>(g.n - 1) * (g.n - 1);
    for (Word c : x)
        if (c < 0 || c >= std::max<Word>(cap, 1)) throw ParameterError("color outside [0, n^2)");

    // The budget references the original graph's max degree.
    auto deg = degrees(g);
    Word delta_orig = 0;
    for (int u = 0; u < g.n; ++u)
        if (u != vn) delta_orig = std::max(delta_orig, deg[u] - 1);  // minus the virtual edge

    VirtualNodeProgram prog;
    prog.vn = vn;
    prog.n_total = g.n;
    prog.colors = &x;
    Word max_color = 1;
    for (Word c : x) max_color = std::max(max_color, c);
    prog.h_color = prog.header.add(bits_for(std::max<Word>(max_color, 1)));
    prog.h_deg = prog.header.add(bits_for(std::max(g.n, 2)));

    StepBudget budget{"TIME(n*Delta*log n)",
                      [delta_orig](Word n, Word) {
                          return n * std::max<Word>(delta_orig, 1) * StepBudget::log2ceil(n);
                      },
                      8.0};
    auto run = run_node_program(g, prog, w, budget, max_rounds);
    if (run.status == RunStatus::Timeout) throw ResourceError("wl_virtual_node timed out");
    WlCongestResult out;
    out.log = std::move(run.log);
    out.colors.resize(g.n - 1);
    for (int u = 0, k = 0; u < g.n; ++u)
        if (u != vn) out.colors[k++] = run.states[u].my_color;
    return out;
}

}  // namespace rlc
