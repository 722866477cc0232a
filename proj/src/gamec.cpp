#include "mitlgame/gamec.hpp"

#include <algorithm>

namespace mitlgame {

std::vector<bool> GamecSet::in_union(std::size_t n) const {
  std::vector<bool> out(n, false);
  for (const auto& c : components)
    for (auto s : c.states) out[s] = true;
  return out;
}

std::vector<std::size_t> robust_rows(const Game& z, std::size_t s, const std::vector<bool>& member) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < z.rows[s]; ++r) {
    bool closed = true;
    for (std::size_t c = 0; c < z.cols[s] && closed; ++c)
      for (const auto& x : z.block(s, r, c))
        if (x.p > 0 && !member[x.to]) {
          closed = false;
          break;
        }
    if (closed) out.push_back(r);
  }
  return out;
}

std::vector<std::vector<std::size_t>> strongly_connected_components(const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnset), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  std::size_t counter = 0;
  // Explicit DFS frames (vertex, next neighbour position).
  std::vector<std::pair<std::size_t, std::size_t>> frames;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    frames.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      if (pos < adj[v].size()) {
        std::size_t w = adj[v][pos++];
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
      const std::size_t done = v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
    }
  }
  return out;
}

GamecSet compute_gmecs(const Game& z) {
  const std::size_t n = z.size();
  std::vector<std::vector<std::size_t>> candidates;
  if (n > 0) {
    candidates.emplace_back(n);
    for (std::size_t s = 0; s < n; ++s) candidates[0][s] = s;
  }
  std::vector<bool> member(n, false);
  for (;;) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& cand : candidates) {
      for (auto s : cand) member[s] = true;
      // Drop states without a robust row until stable; removals can cascade.
      std::vector<std::size_t> alive = cand;
      for (bool changed = true; changed;) {
        changed = false;
        std::vector<std::size_t> keep;
        for (auto s : alive) {
          if (robust_rows(z, s, member).empty()) {
            member[s] = false;
            changed = true;
          } else {
            keep.push_back(s);
          }
        }
        alive = std::move(keep);
      }
      if (!alive.empty()) {
        std::vector<std::size_t> local(n, 0);
        for (std::size_t i = 0; i < alive.size(); ++i) local[alive[i]] = i;
        std::vector<std::vector<std::size_t>> adj(alive.size());
        for (std::size_t i = 0; i < alive.size(); ++i) {
          const std::size_t s = alive[i];
          std::vector<bool> hit(alive.size(), false);
          for (auto r : robust_rows(z, s, member))
            for (std::size_t c = 0; c < z.cols[s]; ++c)
              for (const auto& x : z.block(s, r, c))
                if (x.p > 0 && !hit[local[x.to]]) {
                  hit[local[x.to]] = true;
                  adj[i].push_back(local[x.to]);
                }
          std::sort(adj[i].begin(), adj[i].end());
        }
        for (auto& comp : strongly_connected_components(adj)) {
          std::vector<std::size_t> states;
          for (auto i : comp) states.push_back(alive[i]);
          std::sort(states.begin(), states.end());
          next.push_back(std::move(states));
        }
      }
      for (auto s : cand) member[s] = false;
    }
    std::sort(next.begin(), next.end());
    if (next == candidates) break;
    candidates = std::move(next);
  }
  GamecSet out;
  for (const auto& cand : candidates) {
    for (auto s : cand) member[s] = true;
    SubGame g;
    g.states = cand;
    for (auto s : cand) g.rows.push_back(robust_rows(z, s, member));
    for (auto s : cand) member[s] = false;
    out.components.push_back(std::move(g));
  }
  return out;
}

GamecSet compute_gamecs(const Game& z) {
  GamecSet all = compute_gmecs(z);
  GamecSet out;
  for (auto& c : all.components)
    if (std::any_of(c.states.begin(), c.states.end(), [&](std::size_t s) { return z.accepting[s]; }))
      out.components.push_back(std::move(c));
  return out;
}

}  // namespace mitlgame
