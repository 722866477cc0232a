#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mitlgame {

struct Succ {
  std::uint32_t to = 0;
  double p = 0.0;
  friend bool operator==(const Succ&, const Succ&) = default;
  friend auto operator<=>(const Succ&, const Succ&) = default;
};
using Block = std::vector<Succ>;  // successor distribution, ascending `to`

// Finite concurrent stochastic game. At state s the defender picks a row in
// [0, rows[s]) and the adversary a column in [0, cols[s]); the pair selects
// blocks[s][block_of[s][r * cols[s] + c]]. Identical successor distributions
// share one block.
struct Game {
  std::size_t initial = 0;
  std::vector<bool> accepting;
  std::vector<std::size_t> rows, cols;
  std::vector<std::vector<std::uint32_t>> block_of;
  std::vector<std::vector<Block>> blocks;
  std::vector<std::string> names;

  std::size_t size() const { return accepting.size(); }
  const Block& block(std::size_t s, std::size_t r, std::size_t c) const {
    return blocks[s][block_of[s][r * cols[s] + c]];
  }
  // Adds a state with the given block matrix (row-major), deduplicating blocks.
  std::size_t add_state(std::size_t nrows, std::size_t ncols, const std::vector<Block>& matrix, bool acc,
                        std::string name = {});
  // Throws Error(Runtime) on bad indices; returns the largest |row sum - 1|.
  double stochasticity_error() const;
};

}  // namespace mitlgame
