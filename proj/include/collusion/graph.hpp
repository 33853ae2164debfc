#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace collusion {

using Edge = std::pair<std::size_t, std::size_t>;

// Simple undirected graph. Edges are stored with first < second, sorted and
// unique.
class Graph {
 public:
  Graph() = default;
  // Throws ValidationError on self-loops or endpoints >= num_vertices.
  Graph(std::size_t num_vertices, std::vector<Edge> edges);

  std::size_t num_vertices() const { return num_vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }

  // Edges with neither endpoint in `cover` (a bitmask over vertices).
  std::size_t uncovered_edges(const std::vector<std::uint8_t>& cover) const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::size_t num_vertices_ = 0;
  std::vector<Edge> edges_;
};

Graph complete_graph(std::size_t n);
Graph random_graph(std::size_t n, double edge_probability, std::uint64_t seed);

}  // namespace collusion
