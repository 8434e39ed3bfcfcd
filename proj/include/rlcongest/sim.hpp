#ifndef RLCONGEST_SIM_HPP
#define RLCONGEST_SIM_HPP

#include <algorithm>
#include <exception>
#include <functional>
#include <numeric>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rlcongest/graph.hpp"
#include "rlcongest/types.hpp"

namespace rlc {

using Message = WordList;

enum class StepKind { Compare, WordOp, Read, Write };

// Per-(node, round) computation-step counter. Comparisons and single-word
// reads/writes/arithmetic each cost 1.
class StepMeter {
public:
    void step(StepKind kind) { charge(kind, 1); }
    void charge(StepKind, long long k) { *counter_ += k; }
    void charge(long long k) { *counter_ += k; }

private:
    friend class RoundApi;
    explicit StepMeter(Word* counter) : counter_(counter) {}
    Word* counter_;
};

// A per-node per-round step cap: kappa * bound(n, max_degree). A negative cap
// disables the check.
struct StepBudget {
    std::string class_name;
    std::function<Word(Word n, Word max_degree)> bound;
    double kappa = 8.0;

    Word cap(Word n, Word max_degree) const {
        if (!bound) return -1;
        return static_cast<Word>(kappa * static_cast<double>(bound(n, max_degree)));
    }

    static Word log2ceil(Word v) {
        Word bits = 0;
        while ((Word{1} << bits) < v) ++bits;
        return std::max<Word>(bits, 1);
    }

    static StepBudget time_n_delta_log_n(double kappa = 8.0) {
        return {"TIME(n*Delta*log n)",
                [](Word n, Word d) { return n * std::max<Word>(d, 1) * log2ceil(n); }, kappa};
    }
    static StepBudget time_delta_polylog(double kappa = 8.0) {
        // Delta * log^2 n: the bitonic network costs a log factor over the
        // paper's TIME(Delta) claim.
        return {"TIME(Delta*log^2 n)",
                [](Word n, Word d) {
                    Word lg = log2ceil(n);
                    return std::max<Word>(d, 1) * lg * lg;
                },
                kappa};
    }
    static StepBudget unbounded() { return {"unbounded", nullptr, 0.0}; }
};

struct BandwidthViolation : std::runtime_error {
    BandwidthViolation(Word round, int from, int to, Word words, int w)
        : std::runtime_error("bandwidth violation at round " + std::to_string(round) + " on edge " +
                             std::to_string(from) + "->" + std::to_string(to) + ": " +
                             std::to_string(words) + " words > w=" + std::to_string(w)),
          round(round),
          from(from),
          to(to),
          words(words) {}
    Word round;
    int from;
    int to;
    Word words;
};

struct BudgetViolation : std::runtime_error {
    BudgetViolation(Word round, int node, Word steps, Word cap)
        : std::runtime_error("step budget violation at round " + std::to_string(round) +
                             " on node " + std::to_string(node) + ": " + std::to_string(steps) +
                             " steps > cap " + std::to_string(cap)),
          round(round),
          node(node),
          steps(steps),
          cap(cap) {}
    Word round;
    int node;
    Word steps;
    Word cap;
};

// Per-round, per-directed-edge and per-node accounting. Directed edge index
// of edge e=(a,b), a<b: 2e for a->b, 2e+1 for b->a.
struct RoundLog {
    Word rounds = 0;
    int n = 0;
    int w = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<Word>> words_sent;  // [round][directed edge]
    std::vector<std::vector<Word>> steps;       // [round][node]
    Word total_words = 0;
    Word peak_node_steps = 0;
};

enum class RunStatus { Completed, Timeout };

template <class State>
struct RunResult {
    RunStatus status = RunStatus::Completed;
    std::vector<State> states;
    RoundLog log;
};

struct NodeContext {
    int node = 0;
    int n = 0;
    int w = 0;
    const std::vector<int>* neighbors = nullptr;  // sorted
    const std::vector<Word>* features = nullptr;  // may be null
    Word label = -1;

    int degree() const { return static_cast<int>(neighbors->size()); }
    int neighbor(int j) const { return (*neighbors)[j]; }
    // Index of node v in the sorted neighbor list; -1 if absent.
    int neighbor_index(int v) const {
        auto it = std::lower_bound(neighbors->begin(), neighbors->end(), v);
        if (it == neighbors->end() || *it != v) return -1;
        return static_cast<int>(it - neighbors->begin());
    }
};

// What a node sees and does within one round: last round's inboxes (keyed by
// neighbor position, never arrival order) and this round's outboxes.
class RoundApi {
public:
    Word round() const { return round_; }
    const Message& inbox(int j) const { return (*inboxes_)[j]; }
    void send(int j, Word word) { (*outboxes_)[j].push_back(word); }
    void send(int j, const Message& msg) {
        auto& out = (*outboxes_)[j];
        out.insert(out.end(), msg.begin(), msg.end());
    }
    StepMeter& meter() { return meter_; }

private:
    template <class P>
    friend class Runner;
    RoundApi(Word round, const std::vector<Message>* in, std::vector<Message>* out, Word* counter)
        : round_(round), inboxes_(in), outboxes_(out), meter_(counter) {}
    Word round_;
    const std::vector<Message>* inboxes_;
    std::vector<Message>* outboxes_;
    StepMeter meter_;
};

// Lock-step executor. Programs provide:
//   struct State;
//   State init(const NodeContext&) const;
//   bool on_round(State&, const NodeContext&, RoundApi&) const;  // true = halt
// on_round in round r sees exactly the messages sent in round r-1. A halted
// node is never invoked again and emits nothing.
template <class P>
class Runner {
public:
    using State = typename P::State;

    Runner(const AttributedGraph& g, const P& program, int w, StepBudget budget,
           Word max_rounds, int num_threads = 1, bool stop_on_quiescence = false)
        : g_(g),
          program_(program),
          w_(w),
          budget_(std::move(budget)),
          max_rounds_(max_rounds),
          num_threads_(std::max(1, num_threads)),
          stop_on_quiescence_(stop_on_quiescence) {
        if (w < 1) throw ParameterError("width must be >= 1");
        adj_ = adjacency(g);
        Word max_deg = 0;
        for (const auto& a : adj_) max_deg = std::max<Word>(max_deg, static_cast<Word>(a.size()));
        cap_ = budget_.cap(g.n, max_deg);
        // Reverse index: rev_[u][j] = position of u in adj_[neighbor j].
        rev_.resize(g.n);
        dir_edge_.resize(g.n);
        std::vector<std::vector<std::pair<int, int>>> edge_at(g.n);
        for (int e = 0; e < g.m(); ++e) {
            auto [a, b] = g.edges[e];
            edge_at[a].emplace_back(b, e);
            edge_at[b].emplace_back(a, e);
        }
        for (int u = 0; u < g.n; ++u) {
            std::sort(edge_at[u].begin(), edge_at[u].end());
            rev_[u].resize(adj_[u].size());
            dir_edge_[u].resize(adj_[u].size());
            for (std::size_t j = 0; j < adj_[u].size(); ++j) {
                int v = adj_[u][j];
                auto it = std::lower_bound(adj_[v].begin(), adj_[v].end(), u);
                rev_[u][j] = static_cast<int>(it - adj_[v].begin());
                int e = edge_at[u][j].second;
                dir_edge_[u][j] = 2 * e + (u < v ? 0 : 1);
            }
        }
    }

    RunResult<State> run() {
        const int n = g_.n;
        RunResult<State> result;
        result.log.n = n;
        result.log.w = w_;
        result.log.edges = g_.edges;

        std::vector<State> states;
        states.reserve(n);
        for (int u = 0; u < n; ++u) states.push_back(program_.init(context(u)));

        std::vector<std::vector<Message>> inboxes(n), outboxes(n);
        for (int u = 0; u < n; ++u) {
            inboxes[u].resize(adj_[u].size());
            outboxes[u].resize(adj_[u].size());
        }
        std::vector<char> halted(n, 0);
        int live = n;

        while (live > 0) {
            if (result.log.rounds >= max_rounds_) {
                result.status = RunStatus::Timeout;
                break;
            }
            Word round = ++result.log.rounds;
            result.log.steps.emplace_back(n, 0);
            result.log.words_sent.emplace_back(2 * static_cast<std::size_t>(g_.m()), 0);
            auto& steps = result.log.steps.back();
            auto& words = result.log.words_sent.back();

            std::vector<char> halts(n, 0);
            std::vector<std::exception_ptr> errors(n);
            auto work = [&](int begin, int end) {
                for (int u = begin; u < end; ++u) {
                    if (halted[u]) continue;
                    try {
                        RoundApi api(round, &inboxes[u], &outboxes[u], &steps[u]);
                        halts[u] = program_.on_round(states[u], context(u), api) ? 1 : 0;
                    } catch (...) {
                        errors[u] = std::current_exception();
                    }
                }
            };
            if (num_threads_ == 1 || n < 2 * num_threads_) {
                work(0, n);
            } else {
                std::vector<std::thread> pool;
                int chunk = (n + num_threads_ - 1) / num_threads_;
                for (int t = 0; t < num_threads_; ++t)
                    pool.emplace_back(work, t * chunk, std::min(n, (t + 1) * chunk));
                for (auto& th : pool) th.join();
            }
            for (int u = 0; u < n; ++u)
                if (errors[u]) std::rethrow_exception(errors[u]);

            // Enforce limits in ascending node order (deterministic blame).
            for (int u = 0; u < n; ++u) {
                if (halted[u]) continue;
                if (cap_ >= 0 && steps[u] > cap_) throw BudgetViolation(round, u, steps[u], cap_);
                for (std::size_t j = 0; j < outboxes[u].size(); ++j) {
                    Word sent = static_cast<Word>(outboxes[u][j].size());
                    if (sent > w_) throw BandwidthViolation(round, u, adj_[u][j], sent, w_);
                    words[dir_edge_[u][j]] += sent;
                    result.log.total_words += sent;
                }
                result.log.peak_node_steps = std::max(result.log.peak_node_steps, steps[u]);
            }

            // Deliver round-r messages for round r+1; clear stale inboxes.
            Word inbox_words = 0;
            for (int u = 0; u < n; ++u)
                for (auto& box : inboxes[u]) {
                    inbox_words += static_cast<Word>(box.size());
                    box.clear();
                }
            Word sent_words = 0;
            for (int u = 0; u < n; ++u) {
                if (halted[u]) continue;
                for (std::size_t j = 0; j < outboxes[u].size(); ++j) {
                    int v = adj_[u][j];
                    sent_words += static_cast<Word>(outboxes[u][j].size());
                    inboxes[v][rev_[u][j]] = std::move(outboxes[u][j]);
                    outboxes[u][j].clear();
                }
                if (halts[u]) {
                    halted[u] = 1;
                    --live;
                }
            }
            // A round that neither received nor sent anything repeats forever;
            // routing-style programs end on this global quiescence rather than
            // by self-halting.
            if (stop_on_quiescence_ && inbox_words == 0 && sent_words == 0) break;
        }
        result.states = std::move(states);
        return result;
    }

private:
    NodeContext context(int u) const {
        NodeContext ctx;
        ctx.node = u;
        ctx.n = g_.n;
        ctx.w = w_;
        ctx.neighbors = &adj_[u];
        ctx.features = g_.features.empty() ? nullptr : &g_.features[u];
        ctx.label = g_.labels.empty() ? -1 : g_.labels[u];
        return ctx;
    }

    const AttributedGraph& g_;
    const P& program_;
    int w_;
    StepBudget budget_;
    Word max_rounds_;
    int num_threads_;
    bool stop_on_quiescence_;
    Word cap_ = -1;
    std::vector<std::vector<int>> adj_;
    std::vector<std::vector<int>> rev_;
    std::vector<std::vector<int>> dir_edge_;
};

template <class P>
RunResult<typename P::State> run_node_program(const AttributedGraph& g, const P& program, int w,
                                              const StepBudget& budget, Word max_rounds,
                                              int num_threads = 1,
                                              bool stop_on_quiescence = false) {
    Runner<P> runner(g, program, w, budget, max_rounds, num_threads, stop_on_quiescence);
    return runner.run();
}

// Lexicographic word-list comparison charging one compare step per word pair
// examined.
inline int lex_compare(const WordList& a, const WordList& b, StepMeter& meter) {
    std::size_t k = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < k; ++i) {
        meter.step(StepKind::Compare);
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    }
    if (a.size() != b.size()) {
        meter.step(StepKind::Compare);
        return a.size() < b.size() ? -1 : 1;
    }
    return 0;
}

// Merge sort (stable), charging the comparator per invocation. Comparison
// count is at most k*ceil(log2 k) for k elements.
template <class T, class Less>
void metered_stable_sort(std::vector<T>& items, Less less) {
    if (items.size() < 2) return;
    std::vector<T> buffer(items.size());
    std::function<void(std::size_t, std::size_t)> sort_range = [&](std::size_t lo, std::size_t hi) {
        if (hi - lo < 2) return;
        std::size_t mid = lo + (hi - lo) / 2;
        sort_range(lo, mid);
        sort_range(mid, hi);
        std::size_t i = lo, j = mid, k = lo;
        while (i < mid && j < hi) buffer[k++] = less(items[j], items[i]) ? items[j++] : items[i++];
        while (i < mid) buffer[k++] = items[i++];
        while (j < hi) buffer[k++] = items[j++];
        std::copy(buffer.begin() + lo, buffer.begin() + hi, items.begin() + lo);
    };
    sort_range(0, items.size());
}

}  // namespace rlc

#endif
