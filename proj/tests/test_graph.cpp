#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "embstab/graph.hpp"
#include "embstab/rng.hpp"

using namespace embstab;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("embstab_test_" + name);
}

void write_text(const fs::path& p, const std::string& body) {
  std::ofstream out(p);
  out << body;
}

}  // namespace

TEST_CASE("load_edge_list dedups, symmetrizes, drops self-loops") {
  auto p = temp_file("edges_basic.txt");
  write_text(p, "# comment\n0 1\n1 0\n1 1\n\n  # indented comment\n2 0\n");
  EdgeListStats stats;
  Graph g = load_edge_list(p.string(), std::nullopt, &stats);
  CHECK(g.num_nodes == 3);
  REQUIRE(g.edges.size() == 2);
  CHECK(g.edges[0] == std::pair<Index, Index>{0, 1});
  CHECK(g.edges[1] == std::pair<Index, Index>{0, 2});
  CHECK(stats.self_loops_dropped == 1);
  CHECK(stats.duplicates_dropped == 1);
}

TEST_CASE("load_edge_list empty file with declared node count") {
  auto p = temp_file("edges_empty.txt");
  write_text(p, "");
  Graph g = load_edge_list(p.string(), 5);
  CHECK(g.num_nodes == 5);
  CHECK(g.edges.empty());
}

TEST_CASE("load_edge_list error cases") {
  auto p = temp_file("edges_bad.txt");

  write_text(p, "0 1\n2 x\n");
  CHECK_THROWS_WITH_AS(load_edge_list(p.string()), doctest::Contains(":2:"), DataError);

  write_text(p, "0 1 7\n");
  CHECK_THROWS_AS(load_edge_list(p.string()), DataError);

  write_text(p, "0 -1\n");
  CHECK_THROWS_AS(load_edge_list(p.string()), DataError);

  write_text(p, "0 9\n");
  CHECK_THROWS_AS(load_edge_list(p.string(), 5), DataError);

  CHECK_THROWS_AS(load_edge_list("/nonexistent/file"), DataError);
}

TEST_CASE("save then load is the identity on canonical graphs") {
  SbmConfig cfg;
  cfg.block_sizes = {20, 15};
  cfg.p_in = 0.3;
  cfg.p_out = 0.05;
  cfg.seed = 11;
  Graph g = generate_sbm(cfg);

  auto p = temp_file("edges_roundtrip.txt");
  save_edge_list(g, p.string());
  Graph back = load_edge_list(p.string(), g.num_nodes);
  CHECK(back.num_nodes == g.num_nodes);
  CHECK(back.edges == g.edges);
}

TEST_CASE("directed duplication collapses to undirected edges") {
  // Citation-style lists carry both directions of every edge; loading must
  // halve them (Cora's 10,556 entries -> 5,278 undirected edges).
  SbmConfig cfg;
  cfg.block_sizes = {30};
  cfg.p_in = 0.4;
  cfg.p_out = 0.4;
  cfg.seed = 3;
  Graph g = generate_sbm(cfg);
  REQUIRE(g.edges.size() > 0);

  auto p = temp_file("edges_directed.txt");
  {
    std::ofstream out(p);
    for (auto [u, v] : g.edges) out << u << " " << v << "\n" << v << " " << u << "\n";
  }
  EdgeListStats stats;
  Graph back = load_edge_list(p.string(), g.num_nodes, &stats);
  CHECK(back.edges == g.edges);
  CHECK(stats.duplicates_dropped == g.edges.size());
}

TEST_CASE("load_labels basic and num_classes") {
  auto pe = temp_file("lbl_edges.txt");
  write_text(pe, "0 1\n1 2\n");
  auto pl = temp_file("lbl_labels.txt");

  write_text(pl, "0 0\n1 0\n2 0\n");
  Graph g = load_labels(pl.string(), load_edge_list(pe.string()));
  CHECK(g.num_classes == 1);
  CHECK(g.labels == std::vector<int>{0, 0, 0});

  write_text(pl, "0 2\n2 1\n");
  g = load_labels(pl.string(), load_edge_list(pe.string()));
  CHECK(g.num_classes == 3);
  CHECK(g.labels == std::vector<int>{2, -1, 1});
}

TEST_CASE("load_labels error cases") {
  auto pe = temp_file("lbl_edges2.txt");
  write_text(pe, "0 1\n1 2\n");
  Graph g = load_edge_list(pe.string());
  auto pl = temp_file("lbl_bad.txt");

  write_text(pl, "0 0\n0 1\n");
  CHECK_THROWS_WITH_AS(load_labels(pl.string(), g), doctest::Contains("duplicate"),
                       DataError);

  write_text(pl, "7 0\n");
  CHECK_THROWS_AS(load_labels(pl.string(), g), DataError);

  write_text(pl, "0 -2\n");
  CHECK_THROWS_AS(load_labels(pl.string(), g), DataError);
}

TEST_CASE("generate_sbm trivial probabilities") {
  SbmConfig cfg;
  cfg.block_sizes = {4};
  cfg.p_in = 1.0;
  cfg.p_out = 1.0;
  cfg.seed = 1;
  Graph k4 = generate_sbm(cfg);
  CHECK(k4.num_nodes == 4);
  CHECK(k4.edges.size() == 6);

  cfg.block_sizes = {5, 5};
  cfg.p_in = 0.0;
  cfg.p_out = 0.0;
  Graph empty = generate_sbm(cfg);
  CHECK(empty.edges.empty());
  CHECK(empty.num_classes == 2);
}

TEST_CASE("generate_sbm edge count within 4 sigma of binomial expectation") {
  SbmConfig cfg;
  cfg.block_sizes = {150, 150};
  cfg.p_in = 0.1;
  cfg.p_out = 0.01;
  cfg.seed = 7;
  Graph g = generate_sbm(cfg);

  const double intra_pairs = 2.0 * (150.0 * 149.0 / 2.0);
  const double inter_pairs = 150.0 * 150.0;
  const double expected = intra_pairs * 0.1 + inter_pairs * 0.01;
  const double sigma =
      std::sqrt(intra_pairs * 0.1 * 0.9 + inter_pairs * 0.01 * 0.99);
  CHECK(expected == doctest::Approx(2460.0));
  CHECK(std::abs(static_cast<double>(g.edges.size()) - expected) < 4.0 * sigma);

  for (Index i = 0; i < g.num_nodes; ++i) {
    CHECK(g.labels[static_cast<std::size_t>(i)] == (i < 150 ? 0 : 1));
  }
}

TEST_CASE("generate_sbm determinism and validation") {
  SbmConfig cfg;
  cfg.block_sizes = {40, 30};
  cfg.p_in = 0.2;
  cfg.p_out = 0.03;
  cfg.seed = 99;
  CHECK(generate_sbm(cfg).edges == generate_sbm(cfg).edges);

  SbmConfig bad = cfg;
  bad.p_out = 0.5;
  bad.p_in = 0.1;
  CHECK_THROWS_AS(generate_sbm(bad), DataError);
  bad = cfg;
  bad.block_sizes = {};
  CHECK_THROWS_AS(generate_sbm(bad), DataError);
  bad = cfg;
  bad.block_sizes = {10, 0};
  CHECK_THROWS_AS(generate_sbm(bad), DataError);
}

TEST_CASE("split_nodes hits exact sizes on balanced classes") {
  Graph g;
  g.num_nodes = 100;
  g.num_classes = 2;
  for (Index i = 0; i < 100; ++i) g.labels.push_back(i % 2);

  SplitSpec s = split_nodes(g, {0.7, 0.1, 0.2}, 1);
  CHECK(mask_count(s.train_mask) == 70);
  CHECK(mask_count(s.val_mask) == 10);
  CHECK(mask_count(s.test_mask) == 20);

  // Stratified: exactly 35/5/10 per class.
  Index train_c0 = 0;
  for (Index i = 0; i < 100; ++i) {
    if (s.train_mask[static_cast<std::size_t>(i)] && i % 2 == 0) ++train_c0;
  }
  CHECK(train_c0 == 35);
}

TEST_CASE("split_nodes all-train and determinism") {
  Graph g;
  g.num_nodes = 37;
  g.num_classes = 3;
  for (Index i = 0; i < g.num_nodes; ++i) g.labels.push_back(i % 3);

  SplitSpec all = split_nodes(g, {1.0, 0.0, 0.0}, 4);
  CHECK(mask_count(all.train_mask) == 37);
  CHECK(mask_count(all.val_mask) == 0);

  SplitSpec a = split_nodes(g, {0.6, 0.2, 0.2}, 12);
  SplitSpec b = split_nodes(g, {0.6, 0.2, 0.2}, 12);
  CHECK(a.train_mask == b.train_mask);
  CHECK(a.val_mask == b.val_mask);
  CHECK(a.test_mask == b.test_mask);
}

TEST_CASE("split_nodes masks are disjoint, stratified, and labeled-only") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Graph g;
    g.num_nodes = 30 + static_cast<Index>(rng.uniform_int(200));
    g.num_classes = 2 + static_cast<int>(rng.uniform_int(4));
    std::vector<Index> class_sizes(static_cast<std::size_t>(g.num_classes), 0);
    for (Index i = 0; i < g.num_nodes; ++i) {
      int c = rng.uniform() < 0.1 ? -1 : static_cast<int>(rng.uniform_int(g.num_classes));
      g.labels.push_back(c);
      if (c >= 0) ++class_sizes[static_cast<std::size_t>(c)];
    }
    const double ft = 0.4 + 0.29 * rng.uniform();
    SplitSpec s = split_nodes(g, {ft, 0.1, 0.2}, rng.next_u64());

    std::vector<Index> train_per_class(static_cast<std::size_t>(g.num_classes), 0);
    for (Index i = 0; i < g.num_nodes; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      int in_count = (s.train_mask[iu] ? 1 : 0) + (s.val_mask[iu] ? 1 : 0) +
                     (s.test_mask[iu] ? 1 : 0);
      CHECK(in_count <= 1);
      if (g.labels[iu] < 0) CHECK(in_count == 0);
      if (s.train_mask[iu]) ++train_per_class[static_cast<std::size_t>(g.labels[iu])];
    }
    for (int c = 0; c < g.num_classes; ++c) {
      const auto cu = static_cast<std::size_t>(c);
      if (class_sizes[cu] == 0) continue;
      double frac = static_cast<double>(train_per_class[cu]) /
                    static_cast<double>(class_sizes[cu]);
      CHECK(std::abs(frac - ft) < 2.0 / static_cast<double>(class_sizes[cu]));
      CHECK(train_per_class[cu] >= 1);
    }
  }
}

TEST_CASE("split_nodes keeps tiny classes in the train set") {
  Graph g;
  g.num_nodes = 21;
  g.num_classes = 2;
  for (Index i = 0; i < 20; ++i) g.labels.push_back(0);
  g.labels.push_back(1);  // a single-node class

  SplitSpec s = split_nodes(g, {0.5, 0.25, 0.25}, 9);
  CHECK(s.train_mask[20]);
}

TEST_CASE("split_nodes validation") {
  Graph unlabeled;
  unlabeled.num_nodes = 4;
  CHECK_THROWS_AS(split_nodes(unlabeled, {0.7, 0.1, 0.2}, 0), DataError);

  Graph g;
  g.num_nodes = 4;
  g.num_classes = 2;
  g.labels = {0, 1, 0, 1};
  CHECK_THROWS_AS(split_nodes(g, {0.9, 0.2, 0.2}, 0), DataError);
  CHECK_THROWS_AS(split_nodes(g, {-0.1, 0.5, 0.5}, 0), DataError);
}

TEST_CASE("graph validate rejects broken invariants") {
  Graph g;
  g.num_nodes = 3;
  g.edges = {{0, 1}, {0, 1}};
  CHECK_THROWS_AS(g.validate(), DataError);
  g.edges = {{1, 1}};
  CHECK_THROWS_AS(g.validate(), DataError);
  g.edges = {{2, 1}};
  CHECK_THROWS_AS(g.validate(), DataError);
  g.edges = {{0, 4}};
  CHECK_THROWS_AS(g.validate(), DataError);
}
