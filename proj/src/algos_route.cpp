#include <algorithm>
#include <deque>
#include <map>
#include <numeric>

#include "algos_detail.hpp"
#include "rlcongest/algos.hpp"

namespace rlc {

namespace detail {

std::vector<std::vector<int>> next_hop_table(const AttributedGraph& g) {
    auto adj = adjacency(g);
    std::vector<std::vector<int>> hop(g.n, std::vector<int>(g.n, -1));
    for (int dst = 0; dst < g.n; ++dst) {
        auto dist = bfs_distances(g, dst);
        for (int u = 0; u < g.n; ++u) {
            if (u == dst || dist[u] == kInfiniteDiameter) continue;
            for (int v : adj[u])
                if (dist[v] == dist[u] - 1) {
                    hop[u][dst] = v;  // smallest such neighbor: adj is sorted
                    break;
                }
        }
    }
    return hop;
}

void validate_token_instance(const AttributedGraph& g,
                             const std::vector<std::vector<Token>>& tokens, int L,
                             bool require_dst) {
    if (static_cast<int>(tokens.size()) != g.n)
        throw ParameterError("token lists sized differently from graph");
    if (L < 1) throw ParameterError("L must be >= 1");
    std::size_t key_len = 0;
    bool key_seen = false;
    std::vector<int> per_dst(g.n, 0);
    std::map<Word, int> tag_count;
    for (int u = 0; u < g.n; ++u) {
        if (static_cast<int>(tokens[u].size()) > L)
            throw ParameterError("node holds more than L tokens");
        for (const Token& t : tokens[u]) {
            if (!key_seen) {
                key_len = t.key.size();
                key_seen = true;
            }
            if (t.key.size() != key_len) throw ParameterError("tokens have unequal key lengths");
            if (t.src != u) throw ParameterError("token src must equal its holding node");
            if (++tag_count[t.tag] > 1) throw ParameterError("token tags must be unique");
            if (require_dst) {
                if (t.dst < 0 || t.dst >= g.n) throw ParameterError("token dst out of range");
                if (++per_dst[t.dst] > L)
                    throw ParameterError("more than L tokens share a destination");
            }
        }
    }
}

}  // namespace detail

using detail::EdgeQueue;
using detail::FieldPacker;
using detail::bits_for;
using detail::token_from_words;
using detail::token_less;
using detail::token_width;
using detail::token_words;

long long bitonic_comparator_count(int lanes) {
    int p = 1;
    while (p < lanes) p <<= 1;
    long long stages = 0;
    for (long long k = 2; k <= p; k <<= 1)
        for (long long j = k >> 1; j > 0; j >>= 1) ++stages;
    return stages * (p / 2);
}

namespace {

// ---------------------------------------------------------------------------
// Framed word streams over shortest-path forwarding. The header word packs
// (dst_node, dst_lane, kind, stage, len); len payload words follow. Frames
// are relayed whole; an edge carries w words per round, so frames span round
// boundaries freely.

enum FrameKind : Word { kFrameToken = 0, kFrameCarry = 1, kFrameScan = 2, kFrameHome = 3 };

struct Frame {
    int dst = 0;
    int lane = 0;
    FrameKind kind = kFrameToken;
    int stage = 0;
    WordList payload;
};

struct FrameCodec {
    FieldPacker packer;
    int f_dst = 0, f_lane = 0, f_kind = 0, f_stage = 0, f_len = 0;

    void configure(int n, int lanes, int max_stage, int max_len) {
        f_dst = packer.add(bits_for(std::max(n - 1, 1)));
        f_lane = packer.add(bits_for(std::max(lanes, 2)));
        f_kind = packer.add(2);
        f_stage = packer.add(bits_for(std::max(max_stage + 1, 2)));
        f_len = packer.add(bits_for(std::max(max_len, 2)));
    }
    Word header(const Frame& f) const {
        return packer.pack({static_cast<Word>(f.dst), static_cast<Word>(f.lane),
                            static_cast<Word>(f.kind), static_cast<Word>(f.stage),
                            static_cast<Word>(f.payload.size())});
    }
};

struct TransportState {
    std::vector<WordList> partial;   // per in-edge frame assembly
    std::vector<Word> partial_need;  // 0 = expecting a header next
    std::vector<EdgeQueue> out;      // per out-edge
};

struct Transport {
    const FrameCodec* codec = nullptr;
    const std::vector<std::vector<int>>* next_hop = nullptr;

    void init(TransportState& st, const NodeContext& ctx) const {
        st.partial.resize(ctx.degree());
        st.partial_need.assign(ctx.degree(), 0);
        st.out.resize(ctx.degree());
    }

    void send_frame(TransportState& st, const NodeContext& ctx, const Frame& f) const {
        int hop = (*next_hop)[ctx.node][f.dst];
        int j = ctx.neighbor_index(hop);
        st.out[j].push(codec->header(f));
        st.out[j].push(f.payload);
    }

    // Feeds one inbox word; true when a frame completed.
    bool feed(TransportState& st, int j, Word word, Frame& out) const {
        auto& buf = st.partial[j];
        if (buf.empty()) {
            st.partial_need[j] = codec->packer.get(word, codec->f_len);
            buf.push_back(word);
        } else {
            buf.push_back(word);
            --st.partial_need[j];
        }
        if (st.partial_need[j] != 0) return false;
        Word head = buf[0];
        out.dst = static_cast<int>(codec->packer.get(head, codec->f_dst));
        out.lane = static_cast<int>(codec->packer.get(head, codec->f_lane));
        out.kind = static_cast<FrameKind>(codec->packer.get(head, codec->f_kind));
        out.stage = static_cast<int>(codec->packer.get(head, codec->f_stage));
        out.payload.assign(buf.begin() + 1, buf.end());
        buf.clear();
        return true;
    }

    void drain(TransportState& st, const NodeContext& ctx, RoundApi& api) const {
        for (int j = 0; j < ctx.degree(); ++j) st.out[j].drain(api, j, ctx.w);
    }
};

RoundLog merge_logs(std::initializer_list<const RoundLog*> logs) {
    RoundLog out;
    bool first = true;
    for (const RoundLog* log : logs) {
        if (first) {
            out.n = log->n;
            out.w = log->w;
            out.edges = log->edges;
            first = false;
        }
        out.rounds += log->rounds;
        out.total_words += log->total_words;
        out.peak_node_steps = std::max(out.peak_node_steps, log->peak_node_steps);
        out.words_sent.insert(out.words_sent.end(), log->words_sent.begin(),
                              log->words_sent.end());
        out.steps.insert(out.steps.end(), log->steps.begin(), log->steps.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Direct routing backend: each token forwarded whole along shortest paths.

struct RouteDirectProgram {
    FrameCodec codec;
    Transport transport;
    const std::vector<std::vector<Token>>* tokens = nullptr;
    int key_len = 0;

    struct State {
        TransportState tr;
        std::vector<Token> arrived;
    };

    State init(const NodeContext& ctx) const {
        State st;
        transport.init(st.tr, ctx);
        return st;
    }

    bool on_round(State& st, const NodeContext& ctx, RoundApi& api) const {
        auto& meter = api.meter();
        if (api.round() == 1) {
            std::vector<Token> mine = (*tokens)[ctx.node];
            std::sort(mine.begin(), mine.end(), [](const Token& a, const Token& b) {
                if (a.dst != b.dst) return a.dst < b.dst;
                return token_less(a, b);
            });
            for (const Token& t : mine) {
                if (t.dst == ctx.node) {
                    st.arrived.push_back(t);
                    continue;
                }
                Frame f{static_cast<int>(t.dst), 0, kFrameToken, 0, token_words(t)};
                transport.send_frame(st.tr, ctx, f);
                meter.charge(StepKind::Write, static_cast<long long>(f.payload.size()) + 1);
            }
        }
        for (int j = 0; j < ctx.degree(); ++j) {
            Frame f;
            for (Word word : api.inbox(j)) {
                meter.step(StepKind::Read);
                if (!transport.feed(st.tr, j, word, f)) continue;
                if (f.dst == ctx.node)
                    st.arrived.push_back(token_from_words(f.payload.data(), key_len));
                else
                    transport.send_frame(st.tr, ctx, f);
            }
        }
        transport.drain(st.tr, ctx, api);
        return false;  // the run ends on global quiescence
    }
};

// ---------------------------------------------------------------------------
// Token-atomic convergecast: like the word upcast, but words of one token are
// never interleaved with another's on any edge, so the root can reassemble
// fixed-width tokens positionally per child stream.

struct TokenUpcastProgram {
    const SpanningTreeState* tree = nullptr;
    const std::vector<std::vector<Token>>* tokens = nullptr;
    const std::vector<Word>* subtree_tokens = nullptr;  // own + descendants
    int key_len = 0;

    struct State {
        std::deque<Word> queue;          // whole tokens, word-flattened
        Word sent_words = 0;
        std::vector<WordList> assembly;  // per child edge
        std::vector<Token> at_root;
        int parent_index = -1;
        std::vector<char> is_child;
    };

    State init(const NodeContext& ctx) const {
        State st;
        int u = ctx.node;
        st.is_child.resize(ctx.degree(), 0);
        st.assembly.resize(ctx.degree());
        for (int j = 0; j < ctx.degree(); ++j)
            if (tree->parent[ctx.neighbor(j)] == u) st.is_child[j] = 1;
        if (u != tree->root) st.parent_index = ctx.neighbor_index(tree->parent[u]);
        for (const Token& t : (*tokens)[u]) {
            if (u == tree->root) {
                st.at_root.push_back(t);
            } else {
                WordList ws = token_words(t);
                st.queue.insert(st.queue.end(), ws.begin(), ws.end());
            }
        }
        return st;
    }

    bool on_round(State& st, const NodeContext& ctx, RoundApi& api) const {
        int tw = token_width(key_len);
        for (int j = 0; j < ctx.degree(); ++j) {
            if (!st.is_child[j]) continue;
            const Message& in = api.inbox(j);
            api.meter().charge(StepKind::Read, static_cast<long long>(in.size()));
            auto& buf = st.assembly[j];
            for (Word word : in) {
                buf.push_back(word);
                if (static_cast<int>(buf.size()) < tw) continue;
                if (ctx.node == tree->root)
                    st.at_root.push_back(token_from_words(buf.data(), key_len));
                else
                    st.queue.insert(st.queue.end(), buf.begin(), buf.end());
                buf.clear();
            }
        }
        if (ctx.node == tree->root)
            return static_cast<Word>(st.at_root.size()) == (*subtree_tokens)[ctx.node];
        int sent = 0;
        while (!st.queue.empty() && sent < ctx.w) {
            api.send(st.parent_index, st.queue.front());
            st.queue.pop_front();
            ++sent;
        }
        api.meter().charge(StepKind::Write, sent);
        st.sent_words += sent;
        // Done once every subtree token word has left this node.
        return st.sent_words == (*subtree_tokens)[ctx.node] * tw;
    }
};

// ---------------------------------------------------------------------------
// Stream broadcast down a given tree: the root holds a word stream whose
// length everyone knows; each node forwards it to its children.

struct BroadcastProgram {
    const SpanningTreeState* tree = nullptr;
    const WordList* stream = nullptr;
    Word stream_len = 0;

    struct State {
        WordList buffer;
        std::vector<int> child_index;
        std::vector<Word> cursor;
        int parent_index = -1;
    };

    State init(const NodeContext& ctx) const {
        State st;
        for (int j = 0; j < ctx.degree(); ++j)
            if (tree->parent[ctx.neighbor(j)] == ctx.node) st.child_index.push_back(j);
        st.cursor.assign(st.child_index.size(), 0);
        if (ctx.node == tree->root)
            st.buffer = *stream;
        else
            st.parent_index = ctx.neighbor_index(tree->parent[ctx.node]);
        return st;
    }

    bool on_round(State& st, const NodeContext& ctx, RoundApi& api) const {
        if (st.parent_index >= 0) {
            const Message& in = api.inbox(st.parent_index);
            st.buffer.insert(st.buffer.end(), in.begin(), in.end());
            api.meter().charge(StepKind::Read, static_cast<long long>(in.size()));
        }
        bool done = static_cast<Word>(st.buffer.size()) == stream_len;
        for (std::size_t c = 0; c < st.child_index.size(); ++c) {
            Word& cur = st.cursor[c];
            int sent = 0;
            while (cur < static_cast<Word>(st.buffer.size()) && sent < ctx.w) {
                api.send(st.child_index[c], st.buffer[cur]);
                ++cur;
                ++sent;
            }
            api.meter().charge(StepKind::Write, sent);
            if (cur < stream_len) done = false;
        }
        return done;
    }
};

}  // namespace

RouteResult expander_route(const AttributedGraph& g, const std::vector<std::vector<Token>>& tokens,
                           int w, int L, RouteBackend backend, Word max_rounds) {
    detail::validate_token_instance(g, tokens, L, /*require_dst=*/true);
    if (!is_connected(g)) throw ParameterError("routing requires a connected graph");
    int key_len = 0;
    for (const auto& list : tokens)
        if (!list.empty()) key_len = static_cast<int>(list.front().key.size());

    RouteResult out;
    out.placement.resize(g.n);

    if (backend == RouteBackend::Direct) {
        RouteDirectProgram prog;
        prog.tokens = &tokens;
        prog.key_len = key_len;
        prog.codec.configure(g.n, 2, 2, token_width(key_len));
        auto hops = detail::next_hop_table(g);
        prog.transport.codec = &prog.codec;
        prog.transport.next_hop = &hops;
        auto run = run_node_program(g, prog, w, StepBudget::time_n_delta_log_n(), max_rounds, 1,
                                    /*stop_on_quiescence=*/true);
        if (run.status == RunStatus::Timeout) throw ResourceError("expander_route timed out");
        out.log = std::move(run.log);
        for (int u = 0; u < g.n; ++u) out.placement[u] = std::move(run.states[u].arrived);
        return out;
    }

    // Tree backend: BFS tree from node 0, token-atomic convergecast to the
    // root, broadcast of the whole stream down; everyone keeps its own.
    auto flood = flood_bfs(g, 0, w, max_rounds);
    if (flood.status == RunStatus::Timeout) throw ResourceError("flood timed out");
    int tw = token_width(key_len);

    std::vector<Word> subtree(g.n, 0);
    for (int u = 0; u < g.n; ++u) subtree[u] = static_cast<Word>(tokens[u].size());
    std::vector<int> order(g.n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return flood.tree.depth[a] > flood.tree.depth[b]; });
    for (int u : order)
        if (u != flood.tree.root) subtree[flood.tree.parent[u]] += subtree[u];

    TokenUpcastProgram upp;
    upp.tree = &flood.tree;
    upp.tokens = &tokens;
    upp.subtree_tokens = &subtree;
    upp.key_len = key_len;
    auto up = run_node_program(g, upp, w, StepBudget::time_n_delta_log_n(), max_rounds);
    if (up.status == RunStatus::Timeout) throw ResourceError("token upcast timed out");
    const std::vector<Token>& at_root = up.states[0].at_root;

    WordList stream;
    for (const Token& t : at_root) {
        WordList ws = token_words(t);
        stream.insert(stream.end(), ws.begin(), ws.end());
    }
    BroadcastProgram bcast;
    bcast.tree = &flood.tree;
    bcast.stream = &stream;
    bcast.stream_len = static_cast<Word>(stream.size());
    auto down = run_node_program(g, bcast, w, StepBudget::time_n_delta_log_n(), max_rounds);
    if (down.status == RunStatus::Timeout) throw ResourceError("broadcast timed out");

    out.log = merge_logs({&flood.log, &up.log, &down.log});
    for (int u = 0; u < g.n; ++u) {
        const WordList& local = u == 0 ? stream : down.states[u].buffer;
        for (std::size_t i = 0; i + tw <= local.size(); i += tw) {
            Token t = token_from_words(local.data() + i, key_len);
            if (t.dst == u) out.placement[u].push_back(t);
        }
    }
    return out;
}

namespace {

// ---------------------------------------------------------------------------
// Bitonic sort / token-ranking pipeline.
//
// Every node owns one lane; when the lane count is padded to a power of two,
// ghost lane g (g >= n) is hosted by node g - n and starts with sentinel
// tokens. Each comparator routes the lower lane's block to the higher lane's
// node, which merge-splits and returns the half it does not keep. Ranking
// runs three sorts (by (key, tag); excluding duplicates; by (key, tag)
// again), then propagates representative ranks to duplicates with a
// binary-lifting carry scan over the lane chain, and finally routes every
// token back to its source.

constexpr Word kRankUnset = -1;
constexpr Word kRankDup = -2;

struct ComparatorStep {
    int partner = 0;
    bool keep_smaller = false;
};

enum class PipelineMode { SortOnly, RankHome };

struct SortPipelineConfig {
    int n = 0;
    int lanes = 1;  // power of two >= n
    int L = 1;
    int key_len = 1;
    int sort_stages = 0;                                  // comparator stages per sort
    std::vector<std::vector<ComparatorStep>> schedule;    // [lane][stage within one sort]
    int scan_iters = 0;
    PipelineMode mode = PipelineMode::SortOnly;
    FrameCodec codec;
    std::vector<std::vector<int>> next_hop;

    int node_for_lane(int lane) const { return lane < n ? lane : lane - n; }

    // Global stage numbering across the pipeline phases.
    int sort_stage(int pass, int s) const { return pass * (sort_stages + 1) + s; }
    int carry_stage(int pass) const { return pass * (sort_stages + 1) + sort_stages; }
    int scan_stage(int t) const { return 3 * (sort_stages + 1) + t; }
    int final_carry_stage() const { return scan_stage(scan_iters); }
    int home_stage() const { return final_carry_stage() + 1; }
    int max_stage() const { return home_stage(); }

    void build(int n_nodes, int L_, int key_len_, PipelineMode mode_) {
        n = n_nodes;
        L = L_;
        key_len = key_len_;
        mode = mode_;
        lanes = 1;
        while (lanes < n) lanes <<= 1;
        sort_stages = 0;
        for (int k = 2; k <= lanes; k <<= 1)
            for (int j = k >> 1; j > 0; j >>= 1) ++sort_stages;
        schedule.assign(lanes, {});
        for (int k = 2; k <= lanes; k <<= 1)
            for (int j = k >> 1; j > 0; j >>= 1)
                for (int lane = 0; lane < lanes; ++lane) {
                    int partner = lane ^ j;
                    bool ascending = (std::min(lane, partner) & k) == 0;
                    schedule[lane].push_back(
                        {partner, (lane < partner) == ascending});
                }
        scan_iters = 0;
        while ((1 << scan_iters) < lanes) ++scan_iters;
        codec.configure(n, lanes, max_stage(), token_width(key_len) + 2);
    }
};

// Sentinels: src = -1, key words all maximal; they sort after every real token.
Token make_sentinel(int key_len) {
    Token t;
    t.key.assign(key_len, std::numeric_limits<Word>::max());
    t.tag = std::numeric_limits<Word>::max();
    t.src = -1;
    return t;
}

bool is_sentinel(const Token& t) { return t.src < 0; }

// Comparator orders per pass: pass 0 and 2 by (sentinel, key, tag); pass 1
// additionally pushes duplicate-marked tokens to the end.
bool pipeline_less(const Token& a, const Token& b, int pass, StepMeter& meter) {
    auto cls = [pass](const Token& t) {
        if (is_sentinel(t)) return 2;
        if (pass == 1 && t.rank == kRankDup) return 1;
        return 0;
    };
    int ca = cls(a), cb = cls(b);
    meter.step(StepKind::Compare);
    if (ca != cb) return ca < cb;
    int c = lex_compare(a.key, b.key, meter);
    if (c != 0) return c < 0;
    meter.step(StepKind::Compare);
    return a.tag < b.tag;
}

struct LaneState {
    int lane = 0;
    std::vector<Token> block;
    int pass = 0;      // 0..2: sorts; 3: scan; 4: finished ranking
    int step = 0;      // comparator stage within the pass, or scan iteration
    bool block_sent = false;
    bool carry_sent = false;
    bool dup_marked = false;

    // Scan state: (key, rank) summary of the lane's last token.
    WordList scan_key;
    Word scan_rank = kRankUnset;
    bool scan_value_sent = false;
    bool final_carry_sent = false;
    bool done = false;
};

struct SortRankState {
    TransportState tr;
    std::vector<LaneState> lanes;  // hosted lanes (own node lane, maybe one ghost)
    // Buffers keyed by (stage, lane).
    std::map<std::pair<int, int>, std::vector<Token>> token_buf;
    std::map<std::pair<int, int>, std::vector<WordList>> msg_buf;
    std::vector<Token> home;
    bool started = false;
    bool homed = false;
};

struct SortRankCore {
    const SortPipelineConfig* cfg = nullptr;
    Transport transport;

    void init_state(SortRankState& st, const NodeContext& ctx) const {
        transport.init(st.tr, ctx);
    }

    void start(SortRankState& st, const NodeContext& ctx, std::vector<Token> own_tokens) const {
        st.started = true;
        LaneState own;
        own.lane = ctx.node;
        own.block = std::move(own_tokens);
        while (static_cast<int>(own.block.size()) < cfg->L)
            own.block.push_back(make_sentinel(cfg->key_len));
        st.lanes.push_back(std::move(own));
        int ghost = ctx.node + cfg->n;
        if (ghost < cfg->lanes) {
            LaneState gl;
            gl.lane = ghost;
            gl.block.assign(cfg->L, make_sentinel(cfg->key_len));
            st.lanes.push_back(std::move(gl));
        }
    }

    LaneState* hosted(SortRankState& st, int lane) const {
        for (auto& ls : st.lanes)
            if (ls.lane == lane) return &ls;
        return nullptr;
    }

    void send_block(SortRankState& st, const NodeContext& ctx, int stage, int to_lane,
                    const std::vector<Token>& block, RoundApi& api) const {
        for (const Token& t : block) {
            Frame f{cfg->node_for_lane(to_lane), to_lane, kFrameToken, stage, token_words(t)};
            if (f.dst == ctx.node) {
                st.token_buf[{stage, to_lane}].push_back(t);
            } else {
                transport.send_frame(st.tr, ctx, f);
                api.meter().charge(StepKind::Write,
                                   static_cast<long long>(f.payload.size()) + 1);
            }
        }
    }

    void send_msg(SortRankState& st, const NodeContext& ctx, FrameKind kind, int stage,
                  int to_lane, const WordList& payload, RoundApi& api) const {
        Frame f{cfg->node_for_lane(to_lane), to_lane, kind, stage, payload};
        if (f.dst == ctx.node) {
            st.msg_buf[{stage, to_lane}].push_back(payload);
        } else {
            transport.send_frame(st.tr, ctx, f);
            api.meter().charge(StepKind::Write, static_cast<long long>(payload.size()) + 1);
        }
    }

    void deliver(SortRankState& st, const Frame& f) const {
        if (f.kind == kFrameToken)
            st.token_buf[{f.stage, f.lane}].push_back(
                token_from_words(f.payload.data(), cfg->key_len));
        else if (f.kind == kFrameHome)
            st.home.push_back(token_from_words(f.payload.data(), cfg->key_len));
        else
            st.msg_buf[{f.stage, f.lane}].push_back(f.payload);
    }

    // Merge-split for one comparator; the caller provides both blocks in lane
    // order (low lane's block first when keep_smaller refers to `mine`).
    void merge_split(std::vector<Token>& mine, std::vector<Token>& theirs, bool my_keep_smaller,
                     int pass, StepMeter& meter) const {
        std::vector<Token> all;
        all.reserve(mine.size() + theirs.size());
        all.insert(all.end(), mine.begin(), mine.end());
        all.insert(all.end(), theirs.begin(), theirs.end());
        metered_stable_sort(all, [&](const Token& a, const Token& b) {
            return pipeline_less(a, b, pass, meter);
        });
        int L = cfg->L;
        if (my_keep_smaller) {
            mine.assign(all.begin(), all.begin() + L);
            theirs.assign(all.begin() + L, all.end());
        } else {
            mine.assign(all.begin() + L, all.end());
            theirs.assign(all.begin(), all.begin() + L);
        }
    }

    // One lane's attempt to advance; returns true when something changed.
    bool advance_lane(SortRankState& st, const NodeContext& ctx, LaneState& ls,
                      RoundApi& api) const {
        auto& meter = api.meter();
        if (ls.done) return false;

        if (ls.pass < 3 && ls.step < cfg->sort_stages) {
            const ComparatorStep& cs = cfg->schedule[ls.lane][ls.step];
            int stage = cfg->sort_stage(ls.pass, ls.step);
            bool merger = ls.lane > cs.partner;
            LaneState* local = hosted(st, cs.partner);
            if (local) {
                // Both lanes on this node: merge directly once both arrive.
                if (!merger) return false;  // the merger lane drives it
                if (local->pass != ls.pass || local->step != ls.step) return false;
                merge_split(ls.block, local->block, cs.keep_smaller, ls.pass, meter);
                ++ls.step;
                ++local->step;
                return true;
            }
            if (merger) {
                auto it = st.token_buf.find({stage, ls.lane});
                if (it == st.token_buf.end() ||
                    static_cast<int>(it->second.size()) < cfg->L)
                    return false;
                std::vector<Token> theirs = std::move(it->second);
                st.token_buf.erase(it);
                merge_split(ls.block, theirs, cs.keep_smaller, ls.pass, meter);
                send_block(st, ctx, stage, cs.partner, theirs, api);
                ++ls.step;
                return true;
            }
            if (!ls.block_sent) {
                send_block(st, ctx, stage, cs.partner, ls.block, api);
                ls.block_sent = true;
                return true;
            }
            auto it = st.token_buf.find({stage, ls.lane});
            if (it == st.token_buf.end() || static_cast<int>(it->second.size()) < cfg->L)
                return false;
            ls.block = std::move(it->second);
            st.token_buf.erase(it);
            metered_stable_sort(ls.block, [&](const Token& a, const Token& b) {
                return pipeline_less(a, b, ls.pass, meter);
            });
            ls.block_sent = false;
            ++ls.step;
            return true;
        }

        if (ls.pass < 3) {
            // End of one sort pass: the carry/dup-mark barrier.
            if (cfg->mode == PipelineMode::SortOnly) {
                ls.done = true;
                return true;
            }
            return advance_pass_boundary(st, ctx, ls, api);
        }
        return advance_scan(st, ctx, ls, api);
    }

    bool advance_pass_boundary(SortRankState& st, const NodeContext& ctx, LaneState& ls,
                               RoundApi& api) const {
        auto& meter = api.meter();
        int stage = cfg->carry_stage(ls.pass);
        if (ls.pass == 0) {
            // Duplicate marking: learn the predecessor lane's last key.
            if (!ls.carry_sent) {
                if (ls.lane + 1 < cfg->lanes) {
                    const Token& last = ls.block.back();
                    WordList payload = last.key;
                    payload.push_back(is_sentinel(last) ? 1 : 0);
                    send_msg(st, ctx, kFrameCarry, stage, ls.lane + 1, payload, api);
                }
                ls.carry_sent = true;
                return true;
            }
            if (!ls.dup_marked) {
                const WordList* carry = nullptr;
                if (ls.lane > 0) {
                    auto it = st.msg_buf.find({stage, ls.lane});
                    if (it == st.msg_buf.end() || it->second.empty()) return false;
                    carry = &it->second.front();
                }
                const Word* prev_key = nullptr;
                bool prev_sentinel = true;
                if (carry) {
                    prev_key = carry->data();
                    prev_sentinel = carry->back() != 0;
                }
                for (Token& t : ls.block) {
                    if (is_sentinel(t)) break;
                    bool dup = prev_key != nullptr && !prev_sentinel &&
                               std::equal(t.key.begin(), t.key.end(), prev_key);
                    meter.charge(StepKind::Compare, cfg->key_len);
                    t.rank = dup ? kRankDup : kRankUnset;
                    prev_key = t.key.data();
                    prev_sentinel = false;
                }
                ls.dup_marked = true;
                ++ls.pass;
                ls.step = 0;
                ls.carry_sent = false;
                return true;
            }
            return false;
        }
        if (ls.pass == 1) {
            // Representatives sit in the global prefix; their slot index is
            // the number of distinct keys strictly smaller.
            for (int i = 0; i < cfg->L; ++i) {
                Token& t = ls.block[i];
                if (!is_sentinel(t) && t.rank == kRankUnset)
                    t.rank = static_cast<Word>(ls.lane) * cfg->L + i;
            }
            meter.charge(StepKind::WordOp, cfg->L);
            ++ls.pass;
            ls.step = 0;
            return true;
        }
        // pass == 2: regrouped by (key, tag); fill duplicates locally, then scan.
        WordList prev_key;
        Word prev_rank = kRankUnset;
        for (Token& t : ls.block) {
            if (is_sentinel(t)) break;
            if (t.rank == kRankDup &&
                !prev_key.empty() && t.key == prev_key && prev_rank != kRankUnset)
                t.rank = prev_rank;
            prev_key = t.key;
            prev_rank = t.rank >= 0 ? t.rank : prev_rank;
            meter.charge(StepKind::WordOp, 2);
        }
        const Token& last = ls.block.back();
        ls.scan_key = last.key;
        ls.scan_rank = kRankUnset;
        for (auto it = ls.block.rbegin(); it != ls.block.rend(); ++it)
            if (!is_sentinel(*it) && it->key == ls.scan_key && it->rank >= 0) {
                ls.scan_rank = it->rank;
                break;
            }
        if (is_sentinel(last)) ls.scan_rank = 0;  // sentinel tail carries nothing
        ls.pass = 3;
        ls.step = 0;
        return true;
    }

    bool advance_scan(SortRankState& st, const NodeContext& ctx, LaneState& ls,
                      RoundApi& api) const {
        auto& meter = api.meter();
        // Hillis-Steele over the lane chain with the segmented carry operator:
        // a window's summary is (last key, rank of that key if known).
        if (ls.step < cfg->scan_iters) {
            int stage = cfg->scan_stage(ls.step);
            int jump = 1 << ls.step;
            if (!ls.scan_value_sent) {
                if (ls.lane + jump < cfg->lanes) {
                    WordList payload = ls.scan_key;
                    payload.push_back(ls.scan_rank);
                    send_msg(st, ctx, kFrameScan, stage, ls.lane + jump, payload, api);
                }
                ls.scan_value_sent = true;
                return true;
            }
            if (ls.lane - jump >= 0) {
                auto it = st.msg_buf.find({stage, ls.lane});
                if (it == st.msg_buf.end() || it->second.empty()) return false;
                WordList left = std::move(it->second.front());
                st.msg_buf.erase(it);
                Word left_rank = left.back();
                left.pop_back();
                if (ls.scan_rank == kRankUnset && left == ls.scan_key)
                    ls.scan_rank = left_rank;
                meter.charge(StepKind::Compare, cfg->key_len);
            }
            ++ls.step;
            ls.scan_value_sent = false;
            return true;
        }
        if (!ls.final_carry_sent) {
            // Exclusive carry: hand the scanned summary to the next lane and
            // patch any still-unranked prefix group with the incoming one.
            int stage = cfg->final_carry_stage();
            if (ls.lane + 1 < cfg->lanes) {
                WordList payload = ls.scan_key;
                payload.push_back(ls.scan_rank);
                send_msg(st, ctx, kFrameScan, stage, ls.lane + 1, payload, api);
            }
            ls.final_carry_sent = true;
            return true;
        }
        int stage = cfg->final_carry_stage();
        WordList carry_key;
        Word carry_rank = kRankUnset;
        if (ls.lane > 0) {
            auto it = st.msg_buf.find({stage, ls.lane});
            if (it == st.msg_buf.end() || it->second.empty()) return false;
            carry_key = it->second.front();
            carry_rank = carry_key.back();
            carry_key.pop_back();
        }
        Word prev_rank = kRankUnset;
        WordList prev_key = carry_key;
        if (carry_rank != kRankUnset) prev_rank = carry_rank;
        for (Token& t : ls.block) {
            if (is_sentinel(t)) break;
            if (t.rank < 0 && t.key == prev_key && prev_rank != kRankUnset) t.rank = prev_rank;
            prev_key = t.key;
            if (t.rank >= 0) prev_rank = t.rank;
            meter.charge(StepKind::WordOp, 2);
        }
        // Route everything home.
        for (const Token& t : ls.block) {
            if (is_sentinel(t)) continue;
            Token done = t;
            done.dst = done.src;
            if (static_cast<int>(done.src) == ctx.node) {
                st.home.push_back(done);
            } else {
                Frame f{static_cast<int>(done.src), 0, kFrameHome, cfg->home_stage(),
                        token_words(done)};
                transport.send_frame(st.tr, ctx, f);
                api.meter().charge(StepKind::Write,
                                   static_cast<long long>(f.payload.size()) + 1);
            }
        }
        ls.done = true;
        return true;
    }

    void absorb(SortRankState& st, const NodeContext& ctx, RoundApi& api) const {
        for (int j = 0; j < ctx.degree(); ++j) {
            Frame f;
            for (Word word : api.inbox(j)) {
                api.meter().step(StepKind::Read);
                if (!transport.feed(st.tr, j, word, f)) continue;
                if (f.dst == ctx.node)
                    deliver(st, f);
                else
                    transport.send_frame(st.tr, ctx, f);
            }
        }
    }

    void pump(SortRankState& st, const NodeContext& ctx, RoundApi& api) const {
        if (st.started) {
            bool progress = true;
            while (progress) {
                progress = false;
                for (auto& ls : st.lanes)
                    if (advance_lane(st, ctx, ls, api)) progress = true;
            }
        }
        transport.drain(st.tr, ctx, api);
    }

    void on_round(SortRankState& st, const NodeContext& ctx, RoundApi& api) const {
        absorb(st, ctx, api);
        pump(st, ctx, api);
    }
};

struct SortRankProgram {
    SortPipelineConfig cfg;
    SortRankCore core;
    const std::vector<std::vector<Token>>* tokens = nullptr;

    struct State {
        SortRankState pipe;
    };

    State init(const NodeContext& ctx) const {
        State st;
        core.init_state(st.pipe, ctx);
        return st;
    }

    bool on_round(State& st, const NodeContext& ctx, RoundApi& api) const {
        if (api.round() == 1) core.start(st.pipe, ctx, (*tokens)[ctx.node]);
        core.on_round(st.pipe, ctx, api);
        return false;  // ends on quiescence
    }
};

}  // namespace

RouteResult expander_sort(const AttributedGraph& g, const std::vector<std::vector<Token>>& tokens,
                          int w, int L, Word max_rounds) {
    detail::validate_token_instance(g, tokens, L, /*require_dst=*/false);
    if (!is_connected(g)) throw ParameterError("sorting requires a connected graph");
    if (static_cast<int>(g.labels.size()) != g.n)
        throw ParameterError("expander_sort requires unique IDs");
    int key_len = 1;
    for (const auto& list : tokens)
        if (!list.empty()) key_len = static_cast<int>(list.front().key.size());

    SortRankProgram prog;
    prog.cfg.build(g.n, L, key_len, PipelineMode::SortOnly);
    prog.cfg.next_hop = detail::next_hop_table(g);
    prog.core.cfg = &prog.cfg;
    prog.core.transport.codec = &prog.cfg.codec;
    prog.core.transport.next_hop = &prog.cfg.next_hop;
    prog.tokens = &tokens;

    auto run = run_node_program(g, prog, w, StepBudget::time_delta_polylog(), max_rounds, 1,
                                /*stop_on_quiescence=*/true);
    if (run.status == RunStatus::Timeout) throw ResourceError("expander_sort timed out");
    RouteResult out;
    out.log = std::move(run.log);
    out.placement.resize(g.n);
    for (int u = 0; u < g.n; ++u)
        for (const auto& ls : run.states[u].pipe.lanes) {
            if (ls.lane != u) continue;  // ghost-lane blocks hold sentinels only
            for (const Token& t : ls.block)
                if (!is_sentinel(t)) out.placement[u].push_back(t);
        }
    return out;
}

RouteResult token_rank(const AttributedGraph& g, const std::vector<std::vector<Token>>& tokens,
                       int w, int L, Word max_rounds) {
    detail::validate_token_instance(g, tokens, L, /*require_dst=*/false);
    if (!is_connected(g)) throw ParameterError("ranking requires a connected graph");
    if (static_cast<int>(g.labels.size()) != g.n)
        throw ParameterError("token_rank requires unique IDs");
    int key_len = 1;
    for (const auto& list : tokens)
        if (!list.empty()) key_len = static_cast<int>(list.front().key.size());

    SortRankProgram prog;
    prog.cfg.build(g.n, L, key_len, PipelineMode::RankHome);
    prog.cfg.next_hop = detail::next_hop_table(g);
    prog.core.cfg = &prog.cfg;
    prog.core.transport.codec = &prog.cfg.codec;
    prog.core.transport.next_hop = &prog.cfg.next_hop;
    prog.tokens = &tokens;

    auto run = run_node_program(g, prog, w, StepBudget::time_delta_polylog(), max_rounds, 1,
                                /*stop_on_quiescence=*/true);
    if (run.status == RunStatus::Timeout) throw ResourceError("token_rank timed out");
    RouteResult out;
    out.log = std::move(run.log);
    out.placement.resize(g.n);
    for (int u = 0; u < g.n; ++u) out.placement[u] = std::move(run.states[u].pipe.home);
    return out;
}

namespace {

// ---------------------------------------------------------------------------
// WL step over virtual edges: exchange colors on original edges, form the
// padded WL-type key, rank all keys with the token pipeline, add one to get
// the reference's 1-based dense ranks.

struct VirtualEdgesProgram {
    SortPipelineConfig cfg;
    SortRankCore core;
    const ColorVector* colors = nullptr;
    const std::vector<std::vector<char>>* original_edge = nullptr;  // per node, per edge index

    struct State {
        SortRankState pipe;
        Word my_color = -1;
    };

    State init(const NodeContext& ctx) const {
        State st;
        core.init_state(st.pipe, ctx);
        return st;
    }

    bool on_round(State& st, const NodeContext& ctx, RoundApi& api) const {
        auto& meter = api.meter();
        if (api.round() == 1) {
            const auto& orig = (*original_edge)[ctx.node];
            for (int j = 0; j < ctx.degree(); ++j)
                if (orig[j]) api.send(j, (*colors)[ctx.node]);
            meter.charge(StepKind::Write, ctx.degree());
            return false;
        }
        if (api.round() == 2) {
            const auto& orig = (*original_edge)[ctx.node];
            WordList nbr;
            for (int j = 0; j < ctx.degree(); ++j) {
                if (!orig[j]) continue;
                const Message& in = api.inbox(j);
                if (!in.empty()) nbr.push_back(in[0]);
            }
            metered_stable_sort(nbr, [&](Word a, Word b) {
                meter.step(StepKind::Compare);
                return a < b;
            });
            Token t;
            t.key.reserve(cfg.key_len);
            t.key.push_back((*colors)[ctx.node]);
            t.key.insert(t.key.end(), nbr.begin(), nbr.end());
            t.key.resize(cfg.key_len, -1);  // sentinel pad below any color
            t.tag = ctx.node;
            t.src = ctx.node;
            core.start(st.pipe, ctx, {t});
            // Round-2 inboxes hold the round-1 color words, not frames.
            core.pump(st.pipe, ctx, api);
            return false;
        }
        core.on_round(st.pipe, ctx, api);
        if (st.my_color < 0 && !st.pipe.home.empty())
            st.my_color = st.pipe.home.front().rank + 1;
        return false;
    }
};

}  // namespace

WlCongestResult wl_virtual_edges(const AttributedGraph& g_with_overlay, const ColorVector& x,
                                 int w, Word max_rounds) {
    const AttributedGraph& g = g_with_overlay;
    if (!g.has_edge_flags()) throw ParameterError("missing virtual-edge overlay flags");
    validate_colors(g, x);
    if (!is_connected(g)) throw ParameterError("wl_virtual_edges requires a connected overlay");

    // Original max degree fixes the padded key length 2*Delta + 2.
    std::vector<int> orig_deg(g.n, 0);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        if (g.edge_virtual[e]) continue;
        ++orig_deg[g.edges[e].first];
        ++orig_deg[g.edges[e].second];
    }
    int delta = 0;
    for (int d : orig_deg) delta = std::max(delta, d);
    int key_len = 2 * delta + 2;

    // Per-node edge-index flags for original edges.
    auto adj = adjacency(g);
    std::vector<std::vector<char>> original(g.n);
    for (int u = 0; u < g.n; ++u) original[u].assign(adj[u].size(), 0);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        if (g.edge_virtual[e]) continue;
        auto [u, v] = g.edges[e];
        original[u][std::lower_bound(adj[u].begin(), adj[u].end(), v) - adj[u].begin()] = 1;
        original[v][std::lower_bound(adj[v].begin(), adj[v].end(), u) - adj[v].begin()] = 1;
    }

    VirtualEdgesProgram prog;
    prog.cfg.build(g.n, 1, key_len, PipelineMode::RankHome);
    prog.cfg.next_hop = detail::next_hop_table(g);
    prog.core.cfg = &prog.cfg;
    prog.core.transport.codec = &prog.cfg.codec;
    prog.core.transport.next_hop = &prog.cfg.next_hop;
    prog.colors = &x;
    prog.original_edge = &original;

    auto run = run_node_program(g, prog, w, StepBudget::time_delta_polylog(), max_rounds, 1,
                                /*stop_on_quiescence=*/true);
    if (run.status == RunStatus::Timeout) throw ResourceError("wl_virtual_edges timed out");
    WlCongestResult out;
    out.log = std::move(run.log);
    out.colors.resize(g.n);
    for (int u = 0; u < g.n; ++u) out.colors[u] = run.states[u].my_color;
    return out;
}

}  // namespace rlc
