#include "collusion/graph.hpp"

#include <algorithm>
#include <string>

#include "collusion/error.hpp"
#include "collusion/rng.hpp"

namespace collusion {

Graph::Graph(std::size_t num_vertices, std::vector<Edge> edges) : num_vertices_(num_vertices) {
  for (auto& [u, v] : edges) {
    if (u == v) throw ValidationError("self-loop at vertex " + std::to_string(u));
    if (u >= num_vertices || v >= num_vertices)
      throw ValidationError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                            ") outside vertex range " + std::to_string(num_vertices));
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
}

std::size_t Graph::uncovered_edges(const std::vector<std::uint8_t>& cover) const {
  std::size_t count = 0;
  for (const auto& [u, v] : edges_)
    if (!cover[u] && !cover[v]) ++count;
  return count;
}

Graph complete_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) edges.emplace_back(u, v);
  return Graph(n, std::move(edges));
}

Graph random_graph(std::size_t n, double edge_probability, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (uniform01(rng) < edge_probability) edges.emplace_back(u, v);
  return Graph(n, std::move(edges));
}

}  // namespace collusion
