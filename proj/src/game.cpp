#include "mitlgame/game.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mitlgame/error.hpp"

namespace mitlgame {

std::size_t Game::add_state(std::size_t nrows, std::size_t ncols, const std::vector<Block>& matrix, bool acc,
                            std::string name) {
  if (nrows == 0 || ncols == 0 || matrix.size() != nrows * ncols)
    throw runtime_error("BadGame", "block matrix does not match its dimensions");
  std::map<Block, std::uint32_t> seen;
  std::vector<Block> unique;
  std::vector<std::uint32_t> of(matrix.size());
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    Block b = matrix[i];
    std::sort(b.begin(), b.end(), [](const Succ& x, const Succ& y) { return x.to < y.to; });
    auto [it, fresh] = seen.emplace(b, static_cast<std::uint32_t>(unique.size()));
    if (fresh) unique.push_back(std::move(b));
    of[i] = it->second;
  }
  accepting.push_back(acc);
  rows.push_back(nrows);
  cols.push_back(ncols);
  block_of.push_back(std::move(of));
  blocks.push_back(std::move(unique));
  names.push_back(std::move(name));
  return accepting.size() - 1;
}

double Game::stochasticity_error() const {
  const std::size_t n = size();
  if (initial >= n && n > 0) throw runtime_error("BadGame", "initial state out of range");
  double worst = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (block_of[s].size() != rows[s] * cols[s]) throw runtime_error("BadGame", "block index table has wrong size");
    for (const auto& b : blocks[s]) {
      double total = 0;
      for (const auto& x : b) {
        if (x.to >= n) throw runtime_error("BadGame", "successor out of range");
        total += x.p;
      }
      worst = std::max(worst, std::abs(total - 1.0));
    }
    for (auto k : block_of[s])
      if (k >= blocks[s].size()) throw runtime_error("BadGame", "block index out of range");
  }
  return worst;
}

}  // namespace mitlgame
