#include "embstab/embedding.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <vector>

#include "embstab/io_util.hpp"
#include "embstab/rng.hpp"

namespace embstab {

void Node2vecConfig::validate() const {
  if (dim < 1) throw DataError("node2vec: dim must be >= 1");
  if (walks_per_node < 1) throw DataError("node2vec: walks_per_node must be >= 1");
  if (walk_length < 2) throw DataError("node2vec: walk_length must be >= 2");
  if (context_size < 1 || context_size >= walk_length) {
    throw DataError("node2vec: require 1 <= context_size < walk_length");
  }
  if (!(p > 0.0) || !(q > 0.0)) throw DataError("node2vec: p and q must be positive");
  if (negative_samples < 1) throw DataError("node2vec: negative_samples must be >= 1");
  if (epochs < 1) throw DataError("node2vec: epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw DataError("node2vec: learning_rate must be positive");
}

namespace {

bool is_neighbor(const std::vector<Index>& sorted_adj, Index x) {
  return std::binary_search(sorted_adj.begin(), sorted_adj.end(), x);
}

// Second-order biased walk: bias 1/p toward the previous node, 1 toward
// common neighbors of the previous node, 1/q toward everything else.
std::vector<Index> biased_walk(const std::vector<std::vector<Index>>& adj, Index start,
                               const Node2vecConfig& cfg, Rng& rng) {
  std::vector<Index> walk;
  walk.reserve(static_cast<std::size_t>(cfg.walk_length));
  walk.push_back(start);
  Index prev = -1;
  Index cur = start;
  std::vector<double> cum;
  while (static_cast<int>(walk.size()) < cfg.walk_length) {
    const auto& nbrs = adj[static_cast<std::size_t>(cur)];
    if (nbrs.empty()) break;
    Index next;
    if (prev < 0) {
      next = nbrs[rng.uniform_int(nbrs.size())];
    } else {
      cum.clear();
      double total = 0.0;
      const auto& prev_nbrs = adj[static_cast<std::size_t>(prev)];
      for (Index x : nbrs) {
        double w;
        if (x == prev) {
          w = 1.0 / cfg.p;
        } else if (is_neighbor(prev_nbrs, x)) {
          w = 1.0;
        } else {
          w = 1.0 / cfg.q;
        }
        total += w;
        cum.push_back(total);
      }
      double r = rng.uniform() * total;
      auto it = std::upper_bound(cum.begin(), cum.end(), r);
      if (it == cum.end()) --it;
      next = nbrs[static_cast<std::size_t>(it - cum.begin())];
    }
    walk.push_back(next);
    prev = cur;
    cur = next;
  }
  return walk;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

EmbeddingMatrix node2vec_lite(const Graph& graph, const Node2vecConfig& config) {
  config.validate();
  if (graph.edges.empty()) throw DataError("node2vec: graph has no edges");

  const Index n = graph.num_nodes;
  const Index d = config.dim;
  const auto adj = graph.adjacency_lists();

  Rng base(config.seed);
  Rng rng_init = base.split(1);
  Rng rng_walks = base.split(2);
  Rng rng_train = base.split(3);

  // word2vec-style tables: uniform input table, zero context table.
  Matrix emb(n, d);
  const double half = 0.5 / static_cast<double>(d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) emb(i, j) = rng_init.uniform(-half, half);
  }
  Matrix ctx = Matrix::Zero(n, d);

  std::vector<std::vector<Index>> walks;
  for (Index u = 0; u < n; ++u) {
    if (adj[static_cast<std::size_t>(u)].empty()) continue;
    for (int w = 0; w < config.walks_per_node; ++w) {
      walks.push_back(biased_walk(adj, u, config, rng_walks));
    }
  }

  // Negative sampling from the degree^(3/4) unigram distribution.
  const auto degrees = graph.degrees();
  std::vector<double> neg_cum(static_cast<std::size_t>(n));
  double neg_total = 0.0;
  for (Index i = 0; i < n; ++i) {
    neg_total += std::pow(static_cast<double>(degrees[static_cast<std::size_t>(i)]), 0.75);
    neg_cum[static_cast<std::size_t>(i)] = neg_total;
  }

  std::size_t total_positions = 0;
  for (const auto& w : walks) total_positions += w.size();
  total_positions *= static_cast<std::size_t>(config.epochs);

  Eigen::RowVectorXd accum(d);
  std::vector<std::size_t> order(walks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::size_t processed = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng_train.shuffle(order);
    for (std::size_t wi : order) {
      const auto& walk = walks[wi];
      for (std::size_t i = 0; i < walk.size(); ++i) {
        const double alpha =
            config.learning_rate *
            std::max(1e-4, 1.0 - static_cast<double>(processed) /
                                     static_cast<double>(total_positions));
        ++processed;
        const Index center = walk[i];
        const std::size_t lo = i >= static_cast<std::size_t>(config.context_size)
                                   ? i - static_cast<std::size_t>(config.context_size)
                                   : 0;
        const std::size_t hi =
            std::min(walk.size() - 1, i + static_cast<std::size_t>(config.context_size));
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const Index input = walk[j];
          accum.setZero();
          for (int s = 0; s <= config.negative_samples; ++s) {
            Index target;
            double label;
            if (s == 0) {
              target = center;
              label = 1.0;
            } else {
              double r = rng_train.uniform() * neg_total;
              auto it = std::upper_bound(neg_cum.begin(), neg_cum.end(), r);
              if (it == neg_cum.end()) --it;
              target = static_cast<Index>(it - neg_cum.begin());
              if (target == center) continue;
              label = 0.0;
            }
            const double f = sigmoid(emb.row(input).dot(ctx.row(target)));
            const double g = (label - f) * alpha;
            accum += g * ctx.row(target);
            ctx.row(target) += g * emb.row(input);
          }
          emb.row(input) += accum;
        }
      }
    }
  }

  return EmbeddingMatrix{std::move(emb)};
}

Matrix normalized_adjacency(const Graph& graph) {
  const Index n = graph.num_nodes;
  Matrix a = Matrix::Zero(n, n);
  for (const auto& [u, v] : graph.edges) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  Vector inv_sqrt_deg(n);
  for (Index i = 0; i < n; ++i) {
    double deg = a.row(i).sum();
    inv_sqrt_deg(i) = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  return inv_sqrt_deg.asDiagonal() * a * inv_sqrt_deg.asDiagonal();
}

EmbeddingMatrix spectral_embed(const Graph& graph, Index dim) {
  if (dim < 1) throw DataError("spectral_embed: dim must be >= 1");
  if (dim > graph.num_nodes) {
    throw DataError("spectral_embed: dim exceeds number of nodes");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(normalized_adjacency(graph));
  if (solver.info() != Eigen::Success) {
    throw NumericError("spectral_embed: eigendecomposition failed");
  }
  const Vector& evals = solver.eigenvalues();
  const Matrix& evecs = solver.eigenvectors();

  const Index n = graph.num_nodes;
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(evals(a)) > std::abs(evals(b));
  });
  // A +/- eigenvalue pair has equal magnitude only up to rounding; group
  // near-ties and put the larger (more positive) eigenvalue first.
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo + 1;
    while (hi < order.size() &&
           std::abs(evals(order[hi - 1])) - std::abs(evals(order[hi])) <=
               1e-9 * (1.0 + std::abs(evals(order[lo])))) {
      ++hi;
    }
    std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(lo),
                     order.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](Index a, Index b) { return evals(a) > evals(b); });
    lo = hi;
  }

  Matrix out(n, dim);
  for (Index j = 0; j < dim; ++j) {
    Vector col = evecs.col(order[static_cast<std::size_t>(j)]);
    Index argmax = 0;
    col.cwiseAbs().maxCoeff(&argmax);
    if (col(argmax) < 0.0) col = -col;
    out.col(j) = col;
  }
  return EmbeddingMatrix{std::move(out)};
}

void write_embedding(const EmbeddingMatrix& matrix, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write embedding file: " + path);
  out << "EMB1 " << matrix.num_nodes() << " " << matrix.dim() << "\n";
  for (Index i = 0; i < matrix.num_nodes(); ++i) {
    out << i;
    for (Index j = 0; j < matrix.dim(); ++j) {
      out << " " << format_g17(matrix.values(i, j));
    }
    out << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

EmbeddingMatrix read_embedding(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path);

  std::string magic;
  Index n = -1, d = -1;
  if (!(in >> magic >> n >> d) || magic != "EMB1" || n < 0 || d < 1) {
    throw DataError(path + ": malformed EMB1 header");
  }
  Matrix values(n, d);
  for (Index i = 0; i < n; ++i) {
    Index idx = -1;
    if (!(in >> idx)) throw DataError(path + ": expected " + std::to_string(n) +
                                      " rows, found " + std::to_string(i));
    if (idx != i) {
      throw DataError(path + ": node indices must ascend from 0; expected " +
                      std::to_string(i) + ", got " + std::to_string(idx));
    }
    for (Index j = 0; j < d; ++j) {
      double v;
      if (!(in >> v)) throw DataError(path + ": row " + std::to_string(i) + " is short");
      if (!std::isfinite(v)) {
        throw DataError(path + ": non-finite value at row " + std::to_string(i));
      }
      values(i, j) = v;
    }
  }
  std::string extra;
  if (in >> extra) throw DataError(path + ": trailing content after " +
                                   std::to_string(n) + " rows");
  return EmbeddingMatrix{std::move(values)};
}

}  // namespace embstab
