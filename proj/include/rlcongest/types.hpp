#ifndef RLCONGEST_TYPES_HPP
#define RLCONGEST_TYPES_HPP

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rlc {

// A machine word: all colors, IDs and hop counts fit in one.
using Word = std::int64_t;
using WordList = std::vector<Word>;

inline constexpr Word kInfiniteDiameter = std::numeric_limits<Word>::max();

// Thrown on invalid arguments (bad n, malformed input, missing marker).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a configured resource cap (tuple budget, oracle scale) is exceeded.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rlc

#endif
