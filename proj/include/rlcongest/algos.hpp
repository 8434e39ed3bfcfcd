#ifndef RLCONGEST_ALGOS_HPP
#define RLCONGEST_ALGOS_HPP

#include <functional>
#include <utility>
#include <vector>

#include "rlcongest/graph.hpp"
#include "rlcongest/sim.hpp"
#include "rlcongest/types.hpp"
#include "rlcongest/wl.hpp"

namespace rlc {

struct SpanningTreeState {
    int root = 0;
    std::vector<int> parent;  // -1 at the root
    std::vector<Word> depth;
};

Word tree_depth(const SpanningTreeState& tree);
void validate_tree(const AttributedGraph& g, const SpanningTreeState& tree);

// Fixed-width word record moved by the routing and sorting algorithms. All
// tokens in one run share the same key length; rank -1 means unset.
struct Token {
    WordList key;
    Word tag = 0;
    Word src = 0;
    Word rank = -1;
    Word dst = -1;

    friend bool operator==(const Token& a, const Token& b) = default;
};

// Frozen round-bound constants; tests fail if an implementation regresses
// past them.
inline Word ceil_div(Word a, Word b) { return (a + b - 1) / b; }
inline Word wl_congest_round_bound(Word diameter, Word m, int w) {
    return 3 * diameter + 2 * ceil_div(m, w) + 8;
}
inline Word wl_virtual_node_round_bound(Word max_degree, int w) {
    return 2 * ceil_div(max_degree, w) + 6;
}
inline Word flood_round_bound(Word eccentricity) { return eccentricity + 1; }
inline Word cast_round_bound(Word depth, Word messages, int w) {
    return depth + ceil_div(messages, w) + 2;
}
inline Word route_tree_round_bound(Word depth, Word total_token_words, int w) {
    return 3 * depth + 2 * ceil_div(total_token_words, w) + 8;
}

inline constexpr Word kDefaultMaxRounds = 1'000'000;

struct FloodResult {
    SpanningTreeState tree;
    RoundLog log;
    RunStatus status = RunStatus::Completed;
};

// BFS spanning tree via flooding; each node adopts the smallest-ID neighbor
// heard first. Completes in eccentricity(root) + 1 rounds; disconnected
// graphs time out.
FloodResult flood_bfs(const AttributedGraph& g, int root, int w,
                      Word max_rounds = kDefaultMaxRounds);

struct UpcastResult {
    WordList tokens_at_root;
    RoundLog log;
};

// Pipelined convergecast of single-word tokens along a given tree, w tokens
// per edge per round; finishes within depth + ceil(M/w) + 2 rounds.
UpcastResult upcast(const AttributedGraph& g, const SpanningTreeState& tree,
                    const std::vector<WordList>& tokens_per_node, int w,
                    Word max_rounds = kDefaultMaxRounds);

struct DowncastResult {
    std::vector<WordList> delivered;  // delivered[u] = payloads addressed to u
    RoundLog log;
};

// Pipelined broadcast of addressed messages from the root down the tree; each
// node keeps the ones addressed to it. Payloads must fit in 63 - ceil(log2 n)
// bits so one message packs into one word.
DowncastResult downcast(const AttributedGraph& g, const SpanningTreeState& tree,
                        const std::vector<std::pair<int, Word>>& messages_at_root, int w,
                        Word max_rounds = kDefaultMaxRounds);

struct WlCongestResult {
    ColorVector colors;
    RoundLog log;
};

// One WL iteration in the RL-CONGEST model: BFS tree from node 0, edge and
// color records collected at the root, types ranked there, new colors routed
// back down. Matches wl_step_reference exactly; rounds stay within
// wl_congest_round_bound under StepBudget TIME(n*Delta*log n).
WlCongestResult wl_congest(const AttributedGraph& g, const ColorVector& x, int w,
                           Word max_rounds = kDefaultMaxRounds, int num_threads = 1);

struct GlobalComputeResult {
    std::vector<Word> results;  // one word per node
    RoundLog log;
};

// Collect-compute-broadcast: the root reconstructs the whole attributed graph,
// applies f, and sends each node its result word. The root's computation is
// not budget-capped.
GlobalComputeResult global_compute(const AttributedGraph& g,
                                   const std::function<std::vector<Word>(const AttributedGraph&)>& f,
                                   int w, Word max_rounds = kDefaultMaxRounds);

// One WL iteration on a graph produced by add_virtual_node; x colors the
// original nodes. Rounds stay within wl_virtual_node_round_bound(original
// max degree, w) independently of the diameter.
WlCongestResult wl_virtual_node(const AttributedGraph& g_with_virtual, const ColorVector& x, int w,
                                Word max_rounds = kDefaultMaxRounds);

enum class RouteBackend { Tree, Direct };

struct RouteResult {
    std::vector<std::vector<Token>> placement;  // tokens at each node after the run
    RoundLog log;
};

// Moves every token to the node whose ID equals its dst field. At most L
// tokens per source node and per destination. Tree backend: collect at node 0
// and broadcast back down. Direct backend: shortest-path queued forwarding.
RouteResult expander_route(const AttributedGraph& g, const std::vector<std::vector<Token>>& tokens,
                           int w, int L, RouteBackend backend,
                           Word max_rounds = kDefaultMaxRounds);

// Redistributes tokens so that node-ID order implies key order, via a bitonic
// comparator network over node ranks; each comparator routes one block, merges
// locally, and returns the non-kept half.
RouteResult expander_sort(const AttributedGraph& g, const std::vector<std::vector<Token>>& tokens,
                          int w, int L, Word max_rounds = kDefaultMaxRounds);

// Number of comparators the sorting network uses for `lanes` lanes (after
// padding to a power of two).
long long bitonic_comparator_count(int lanes);

// Sets each token's rank to the number of distinct keys strictly smaller than
// its own, then routes every token back to its source node.
RouteResult token_rank(const AttributedGraph& g, const std::vector<std::vector<Token>>& tokens,
                       int w, int L, Word max_rounds = kDefaultMaxRounds);

// One WL iteration on a graph produced by add_virtual_edges: WL types are
// formed over original edges only, ranked via token ranking over the overlay,
// ranks returned as the new colors. Rounds are reported, not bounded.
WlCongestResult wl_virtual_edges(const AttributedGraph& g_with_overlay, const ColorVector& x,
                                 int w, Word max_rounds = kDefaultMaxRounds);

}  // namespace rlc

#endif
