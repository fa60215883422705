#include "embstab/graph.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "embstab/rng.hpp"

namespace embstab {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::int64_t parse_int(const std::string& tok, const std::string& path, std::size_t line_no) {
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(tok.c_str(), &end, 10);
  if (errno != 0 || end != tok.c_str() + tok.size() || tok.empty()) {
    throw DataError(path + ":" + std::to_string(line_no) + ": expected integer token, got '" + tok + "'");
  }
  return static_cast<std::int64_t>(v);
}

}  // namespace

std::vector<std::vector<Index>> Graph::adjacency_lists() const {
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(num_nodes));
  for (const auto& [u, v] : edges) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

std::vector<Index> Graph::degrees() const {
  std::vector<Index> deg(static_cast<std::size_t>(num_nodes), 0);
  for (const auto& [u, v] : edges) {
    ++deg[static_cast<std::size_t>(u)];
    ++deg[static_cast<std::size_t>(v)];
  }
  return deg;
}

void Graph::validate() const {
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes) {
      throw DataError("edge endpoint out of range");
    }
    if (u == v) throw DataError("self-loop present");
    if (u > v) throw DataError("edge not in canonical (u < v) order");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i - 1] == edges[i]) throw DataError("duplicate edge");
    if (edges[i] < edges[i - 1]) throw DataError("edges not sorted");
  }
  if (!labels.empty()) {
    if (static_cast<Index>(labels.size()) != num_nodes) {
      throw DataError("label vector length does not match node count");
    }
    for (int c : labels) {
      if (c >= num_classes) throw DataError("label exceeds num_classes");
    }
  }
}

std::vector<Index> mask_indices(const std::vector<bool>& mask) {
  std::vector<Index> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(static_cast<Index>(i));
  }
  return out;
}

Index mask_count(const std::vector<bool>& mask) {
  return static_cast<Index>(std::count(mask.begin(), mask.end(), true));
}

Graph load_edge_list(const std::string& path, std::optional<Index> num_nodes,
                     EdgeListStats* stats) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list: " + path);

  EdgeListStats local;
  std::vector<std::pair<Index, Index>> edges;
  Index max_index = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto toks = tokenize(body);
    if (toks.size() != 2) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected two integer tokens");
    }
    Index u = parse_int(toks[0], path, line_no);
    Index v = parse_int(toks[1], path, line_no);
    if (u < 0 || v < 0) {
      throw DataError(path + ":" + std::to_string(line_no) + ": negative node index");
    }
    if (num_nodes && (u >= *num_nodes || v >= *num_nodes)) {
      throw DataError(path + ":" + std::to_string(line_no) + ": node index " +
                      std::to_string(std::max(u, v)) + " >= declared num_nodes " +
                      std::to_string(*num_nodes));
    }
    max_index = std::max({max_index, u, v});
    if (u == v) {
      ++local.self_loops_dropped;
      continue;
    }
    edges.emplace_back(std::min(u, v), std::max(u, v));
  }

  std::sort(edges.begin(), edges.end());
  auto last = std::unique(edges.begin(), edges.end());
  local.duplicates_dropped = static_cast<std::size_t>(edges.end() - last);
  edges.erase(last, edges.end());

  Graph g;
  g.num_nodes = num_nodes ? *num_nodes : max_index + 1;
  g.edges = std::move(edges);
  g.validate();
  if (stats) *stats = local;
  return g;
}

void save_edge_list(const Graph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write edge list: " + path);
  out << "# " << graph.num_nodes << " nodes, " << graph.edges.size() << " undirected edges\n";
  for (const auto& [u, v] : graph.edges) out << u << " " << v << "\n";
  if (!out) throw DataError("write failed: " + path);
}

Graph load_labels(const std::string& path, Graph graph) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file: " + path);

  std::vector<int> labels(static_cast<std::size_t>(graph.num_nodes), -1);
  std::vector<bool> seen(static_cast<std::size_t>(graph.num_nodes), false);
  int max_class = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto toks = tokenize(body);
    if (toks.size() != 2) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected two integer tokens");
    }
    Index u = parse_int(toks[0], path, line_no);
    std::int64_t c = parse_int(toks[1], path, line_no);
    if (u < 0 || u >= graph.num_nodes) {
      throw DataError(path + ":" + std::to_string(line_no) + ": node index out of range");
    }
    if (c < 0) {
      throw DataError(path + ":" + std::to_string(line_no) + ": negative class index");
    }
    if (seen[static_cast<std::size_t>(u)]) {
      throw DataError(path + ":" + std::to_string(line_no) + ": duplicate node index " +
                      std::to_string(u));
    }
    seen[static_cast<std::size_t>(u)] = true;
    labels[static_cast<std::size_t>(u)] = static_cast<int>(c);
    max_class = std::max(max_class, static_cast<int>(c));
  }
  if (max_class < 0) throw DataError(path + ": no labels found");

  graph.labels = std::move(labels);
  graph.num_classes = max_class + 1;
  graph.validate();
  return graph;
}

void save_labels(const Graph& graph, const std::string& path) {
  if (!graph.has_labels()) throw DataError("graph has no labels to save");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write label file: " + path);
  for (Index i = 0; i < graph.num_nodes; ++i) {
    int c = graph.labels[static_cast<std::size_t>(i)];
    if (c >= 0) out << i << " " << c << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

Graph generate_sbm(const SbmConfig& config) {
  if (config.block_sizes.empty()) throw DataError("sbm: block_sizes must be nonempty");
  for (Index b : config.block_sizes) {
    if (b <= 0) throw DataError("sbm: block sizes must be positive");
  }
  if (!(config.p_out >= 0.0 && config.p_out <= config.p_in && config.p_in <= 1.0)) {
    throw DataError("sbm: require 0 <= p_out <= p_in <= 1");
  }

  Graph g;
  for (Index b : config.block_sizes) g.num_nodes += b;
  g.labels.resize(static_cast<std::size_t>(g.num_nodes));
  int block = 0;
  Index filled = 0;
  for (Index b : config.block_sizes) {
    for (Index i = 0; i < b; ++i) g.labels[static_cast<std::size_t>(filled++)] = block;
    ++block;
  }
  g.num_classes = block;

  Rng rng(config.seed);
  for (Index u = 0; u < g.num_nodes; ++u) {
    for (Index v = u + 1; v < g.num_nodes; ++v) {
      double p = g.labels[static_cast<std::size_t>(u)] == g.labels[static_cast<std::size_t>(v)]
                     ? config.p_in
                     : config.p_out;
      if (rng.uniform() < p) g.edges.emplace_back(u, v);
    }
  }
  g.validate();
  return g;
}

SplitSpec split_nodes(const Graph& graph, std::array<double, 3> fractions,
                      std::uint64_t seed) {
  double sum = fractions[0] + fractions[1] + fractions[2];
  if (fractions[0] < 0 || fractions[1] < 0 || fractions[2] < 0 || sum > 1.0 + 1e-12) {
    throw DataError("split fractions must be nonnegative and sum to at most 1");
  }
  if (!graph.has_labels()) throw DataError("split_nodes requires a labeled graph");

  std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(graph.num_classes));
  for (Index i = 0; i < graph.num_nodes; ++i) {
    int c = graph.labels[static_cast<std::size_t>(i)];
    if (c >= 0) by_class[static_cast<std::size_t>(c)].push_back(i);
  }

  SplitSpec split;
  split.train_mask.assign(static_cast<std::size_t>(graph.num_nodes), false);
  split.val_mask.assign(static_cast<std::size_t>(graph.num_nodes), false);
  split.test_mask.assign(static_cast<std::size_t>(graph.num_nodes), false);

  Rng master(seed);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& nodes = by_class[c];
    if (nodes.empty()) continue;
    const auto n = static_cast<double>(nodes.size());

    // Largest-remainder apportionment over train/val/test plus the implicit
    // unassigned bucket, so every bucket lands within one node of its quota.
    std::array<double, 4> quota = {fractions[0] * n, fractions[1] * n, fractions[2] * n,
                                   (1.0 - sum) * n};
    std::array<Index, 4> count{};
    Index assigned = 0;
    for (int b = 0; b < 4; ++b) {
      count[b] = static_cast<Index>(std::floor(quota[b]));
      assigned += count[b];
    }
    std::array<int, 4> order = {0, 1, 2, 3};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return quota[a] - std::floor(quota[a]) > quota[b] - std::floor(quota[b]);
    });
    for (Index left = static_cast<Index>(nodes.size()) - assigned, i = 0; left > 0;
         --left, ++i) {
      ++count[order[static_cast<std::size_t>(i % 4)]];
    }
    if (fractions[0] > 0.0 && count[0] == 0) {
      for (int b = 3; b >= 1; --b) {
        if (count[b] > 0) {
          --count[b];
          ++count[0];
          break;
        }
      }
    }

    Rng class_rng = master.split(static_cast<std::uint64_t>(c));
    class_rng.shuffle(nodes);
    std::size_t pos = 0;
    for (Index i = 0; i < count[0]; ++i) split.train_mask[static_cast<std::size_t>(nodes[pos++])] = true;
    for (Index i = 0; i < count[1]; ++i) split.val_mask[static_cast<std::size_t>(nodes[pos++])] = true;
    for (Index i = 0; i < count[2]; ++i) split.test_mask[static_cast<std::size_t>(nodes[pos++])] = true;
  }
  return split;
}

}  // namespace embstab
