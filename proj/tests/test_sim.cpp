#include <doctest.h>

#include <algorithm>

#include "rlcongest/graph.hpp"
#include "rlcongest/prng.hpp"
#include "rlcongest/sim.hpp"

using namespace rlc;

namespace {

// Each node sends its ID once, halts after it has heard all neighbors.
struct EchoProgram {
    struct State {
        int heard = 0;
    };
    State init(const NodeContext&) const { return {}; }
    bool on_round(State& st, const NodeContext& ctx, RoundApi& api) const {
        if (api.round() == 1) {
            for (int j = 0; j < ctx.degree(); ++j) api.send(j, ctx.node);
            return ctx.degree() == 0;
        }
        for (int j = 0; j < ctx.degree(); ++j) st.heard += static_cast<int>(api.inbox(j).size());
        return st.heard == ctx.degree();
    }
};

struct NoopProgram {
    struct State {};
    State init(const NodeContext&) const { return {}; }
    bool on_round(State&, const NodeContext&, RoundApi&) const { return true; }
};

// Sends `count` words on every edge in round 1.
struct BurstProgram {
    int count;
    struct State {};
    State init(const NodeContext&) const { return {}; }
    bool on_round(State&, const NodeContext& ctx, RoundApi& api) const {
        for (int j = 0; j < ctx.degree(); ++j)
            for (int i = 0; i < count; ++i) api.send(j, i);
        return true;
    }
};

// Burns `steps` meter charges each round, halting after round 1.
struct BusyProgram {
    long long steps;
    struct State {};
    State init(const NodeContext&) const { return {}; }
    bool on_round(State&, const NodeContext&, RoundApi& api) const {
        api.meter().charge(StepKind::WordOp, steps);
        return true;
    }
};

// Floods a marker injected at one node; records the round each node first saw it.
struct ProbeProgram {
    int source;
    struct State {
        bool seen = false;
        Word seen_round = -1;
    };
    State init(const NodeContext& ctx) const {
        State st;
        if (ctx.node == source) {
            st.seen = true;
            st.seen_round = 0;
        }
        return st;
    }
    bool on_round(State& st, const NodeContext& ctx, RoundApi& api) const {
        bool newly = false;
        if (!st.seen) {
            for (int j = 0; j < ctx.degree(); ++j)
                if (!api.inbox(j).empty()) {
                    st.seen = true;
                    st.seen_round = api.round();
                    newly = true;
                }
        } else if (api.round() == 1) {
            newly = true;  // the source broadcasts in round 1
        }
        if (newly)
            for (int j = 0; j < ctx.degree(); ++j) api.send(j, Word{1});
        return st.seen && !newly;
    }
};

}  // namespace

TEST_CASE("echo on K_3 completes in two rounds with one word per edge per round") {
    auto k3 = gen_family(Family::Complete, 3);
    EchoProgram prog;
    auto res = run_node_program(k3, prog, 1, StepBudget::unbounded(), 100);
    CHECK(res.status == RunStatus::Completed);
    CHECK(res.log.rounds == 2);
    for (const auto& round : res.log.words_sent)
        for (Word words : round) CHECK(words <= 1);
    CHECK(res.log.total_words == 6);
}

TEST_CASE("halt-immediately program runs one round and sends nothing") {
    auto g = gen_family(Family::Cycle, 5);
    NoopProgram prog;
    auto res = run_node_program(g, prog, 4, StepBudget::unbounded(), 100);
    CHECK(res.log.rounds == 1);
    CHECK(res.log.total_words == 0);
}

TEST_CASE("sending w+1 words raises a bandwidth violation naming round and edge") {
    auto g = gen_family(Family::Path, 3);
    BurstProgram prog{4};
    try {
        run_node_program(g, prog, 3, StepBudget::unbounded(), 100);
        FAIL("expected a bandwidth violation");
    } catch (const BandwidthViolation& v) {
        CHECK(v.round == 1);
        CHECK(v.words == 4);
    }
}

TEST_CASE("bandwidth fuzzing: violations exactly when the outbox exceeds w") {
    auto g = gen_family(Family::Complete, 4);
    Prng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        int w = 1 + static_cast<int>(rng.next_below(4));
        int count = 1 + static_cast<int>(rng.next_below(8));
        BurstProgram prog{count};
        bool violated = false;
        try {
            run_node_program(g, prog, w, StepBudget::unbounded(), 10);
        } catch (const BandwidthViolation&) {
            violated = true;
        }
        CHECK(violated == (count > w));
    }
}

TEST_CASE("step budget violations name the node and respect the cap") {
    auto g = gen_family(Family::Path, 4);
    StepBudget tight{"TIME(1)", [](Word, Word) { return Word{10}; }, 1.0};
    BusyProgram fine{9};
    CHECK(run_node_program(g, fine, 1, tight, 10).status == RunStatus::Completed);
    BusyProgram heavy{11};
    try {
        run_node_program(g, heavy, 1, tight, 10);
        FAIL("expected a budget violation");
    } catch (const BudgetViolation& v) {
        CHECK(v.node == 0);
        CHECK(v.steps == 11);
        CHECK(v.cap == 10);
    }
}

TEST_CASE("timeout returns a partial log instead of throwing") {
    // A program that never halts.
    struct Stubborn {
        struct State {};
        State init(const NodeContext&) const { return {}; }
        bool on_round(State&, const NodeContext&, RoundApi&) const { return false; }
    };
    auto g = gen_family(Family::Path, 3);
    Stubborn prog;
    auto res = run_node_program(g, prog, 1, StepBudget::unbounded(), 7);
    CHECK(res.status == RunStatus::Timeout);
    CHECK(res.log.rounds == 7);
}

TEST_CASE("synchrony: information moves at most one hop per round") {
    for (Word seed = 1; seed <= 10; ++seed) {
        auto g = largest_component(gen_erdos_renyi(24, 0.12, seed));
        if (g.n < 3) continue;
        ProbeProgram prog{0};
        auto res = run_node_program(g, prog, 1, StepBudget::unbounded(), 1000);
        REQUIRE(res.status == RunStatus::Completed);
        auto dist = bfs_distances(g, 0);
        for (int u = 1; u < g.n; ++u) {
            // A marker injected at round 1 cannot be visible at distance k
            // before round k+1, and flooding reaches exactly that bound.
            CHECK(res.states[u].seen_round == dist[u] + 1);
        }
    }
}

TEST_CASE("identical runs are bit-for-bit deterministic across thread counts") {
    auto g = gen_erdos_renyi(40, 0.15, 5);
    EchoProgram prog;
    auto base = run_node_program(g, prog, 2, StepBudget::unbounded(), 100, 1);
    for (int threads : {2, 4}) {
        auto res = run_node_program(g, prog, 2, StepBudget::unbounded(), 100, threads);
        CHECK(res.log.rounds == base.log.rounds);
        CHECK(res.log.words_sent == base.log.words_sent);
        CHECK(res.log.steps == base.log.steps);
    }
}

TEST_CASE("inboxes are keyed by neighbor id, not arrival order") {
    // Node 1 in P_3 receives from 0 and 2; inbox index must follow sorted ids.
    struct Sender {
        struct State {
            WordList got;
        };
        State init(const NodeContext&) const { return {}; }
        bool on_round(State& st, const NodeContext& ctx, RoundApi& api) const {
            if (api.round() == 1) {
                for (int j = 0; j < ctx.degree(); ++j) api.send(j, 100 + ctx.node);
                return false;
            }
            for (int j = 0; j < ctx.degree(); ++j)
                for (Word w : api.inbox(j)) st.got.push_back(w);
            return true;
        }
    };
    auto g = gen_family(Family::Path, 3);
    Sender prog;
    auto res = run_node_program(g, prog, 1, StepBudget::unbounded(), 10);
    CHECK(res.states[1].got == WordList{100, 102});
}

TEST_CASE("metered merge sort stays within comparison-sort bounds") {
    for (int k : {2, 5, 16, 100}) {
        std::vector<Word> items(k);
        Prng rng(k);
        for (auto& x : items) x = rng.next_below(1000);
        long long compares = 0;
        Word counter = 0;
        metered_stable_sort(items, [&](Word a, Word b) {
            ++compares;
            ++counter;
            return a < b;
        });
        CHECK(std::is_sorted(items.begin(), items.end()));
        CHECK(compares >= k - 1);
        Word lg = StepBudget::log2ceil(k);
        CHECK(compares <= static_cast<long long>(k) * lg);
    }
}
