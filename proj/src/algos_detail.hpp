#ifndef RLCONGEST_ALGOS_DETAIL_HPP
#define RLCONGEST_ALGOS_DETAIL_HPP

#include <algorithm>
#include <deque>
#include <vector>

#include "rlcongest/algos.hpp"
#include "rlcongest/sim.hpp"

namespace rlc::detail {

inline int bits_for(Word max_value) {
    int bits = 1;
    while ((Word{1} << bits) <= max_value) ++bits;
    return bits;
}

// Sequential bit-field packer; total width must stay below 63 bits so packed
// words remain nonnegative.
class FieldPacker {
public:
    int add(int bits) {
        int shift = used_;
        used_ += bits;
        if (used_ > 62) throw ResourceError("packed record exceeds word width");
        shifts_.push_back(shift);
        widths_.push_back(bits);
        return static_cast<int>(shifts_.size()) - 1;
    }
    Word pack(const std::vector<Word>& fields) const {
        Word out = 0;
        for (std::size_t i = 0; i < fields.size(); ++i)
            out |= (fields[i] & mask(widths_[i])) << shifts_[i];
        return out;
    }
    Word get(Word packed, int field) const {
        return (packed >> shifts_[field]) & mask(widths_[field]);
    }

private:
    static Word mask(int bits) { return (Word{1} << bits) - 1; }
    int used_ = 0;
    std::vector<int> shifts_;
    std::vector<int> widths_;
};

// Per-edge FIFO word queue with a round quota of w words.
struct EdgeQueue {
    std::deque<Word> words;

    void push(Word word) { words.push_back(word); }
    void push(const WordList& ws) { words.insert(words.end(), ws.begin(), ws.end()); }
    // Emits up to w words into the outbox for this round.
    void drain(RoundApi& api, int j, int w) {
        int sent = 0;
        while (!words.empty() && sent < w) {
            api.send(j, words.front());
            words.pop_front();
            ++sent;
        }
    }
    bool empty() const { return words.empty(); }
};

// Next-hop table toward every destination: the smallest neighbor on a
// shortest path. Routing preprocessing shared by the direct backend and the
// sorting pipeline.
std::vector<std::vector<int>> next_hop_table(const AttributedGraph& g);

// Token wire format: key words then tag, src, rank, dst.
inline WordList token_words(const Token& t) {
    WordList out = t.key;
    out.push_back(t.tag);
    out.push_back(t.src);
    out.push_back(t.rank);
    out.push_back(t.dst);
    return out;
}

inline Token token_from_words(const Word* data, int key_len) {
    Token t;
    t.key.assign(data, data + key_len);
    t.tag = data[key_len];
    t.src = data[key_len + 1];
    t.rank = data[key_len + 2];
    t.dst = data[key_len + 3];
    return t;
}

inline int token_width(int key_len) { return key_len + 4; }

// Total order used by comparators and tie-breaking: (key, tag, src).
inline bool token_less(const Token& a, const Token& b) {
    if (a.key != b.key) return a.key < b.key;
    if (a.tag != b.tag) return a.tag < b.tag;
    return a.src < b.src;
}

void validate_token_instance(const AttributedGraph& g,
                             const std::vector<std::vector<Token>>& tokens, int L,
                             bool require_dst);

}  // namespace rlc::detail

#endif
