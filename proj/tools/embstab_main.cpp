#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "embstab/classify.hpp"
#include "embstab/embedding.hpp"
#include "embstab/funcsim.hpp"
#include "embstab/graph.hpp"
#include "embstab/harness.hpp"
#include "embstab/repsim.hpp"

namespace {

using namespace embstab;

// Usage problems that CLI11 cannot catch (bad positional counts, bad
// combinations); mapped to exit code 1.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

std::vector<Index> parse_index_list(const std::string& csv) {
  std::vector<Index> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t comma = csv.find(',', pos);
    std::string tok = csv.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (tok.empty()) throw UsageError("empty entry in list '" + csv + "'");
    try {
      out.push_back(static_cast<Index>(std::stoll(tok)));
    } catch (const std::exception&) {
      throw UsageError("bad integer '" + tok + "' in list");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t comma = csv.find(',', pos);
    std::string tok = csv.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (tok.empty()) throw UsageError("empty entry in list '" + csv + "'");
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw UsageError("bad number '" + tok + "' in list");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void print_value(double v) { std::printf("%.17g\n", v); }

struct GenArgs {
  std::string blocks;
  double p_in = 0.1;
  double p_out = 0.01;
  std::uint64_t seed = 0;
  std::string edges_out;
  std::string labels_out;
};

struct EmbedArgs {
  std::string graph_path;
  std::optional<Index> num_nodes;
  std::string method = "node2vec";
  Index dim = 128;
  std::uint64_t seed = 0;
  std::string out;
  Node2vecConfig n2v;
};

struct ClassifyArgs {
  std::string embedding;
  std::string labels;
  std::string fractions = "0.7,0.1,0.2";
  std::uint64_t split_seed = 0;
  std::optional<double> l2;
  std::string l2_grid;
  std::string mask = "test";
  std::string out;
  std::string labels_out;
  std::string model_out;
  TrainConfig train;
};

int run_gen(const GenArgs& a) {
  SbmConfig cfg;
  cfg.block_sizes = parse_index_list(a.blocks);
  cfg.p_in = a.p_in;
  cfg.p_out = a.p_out;
  cfg.seed = a.seed;
  Graph g = generate_sbm(cfg);
  save_edge_list(g, a.edges_out);
  if (!a.labels_out.empty()) save_labels(g, a.labels_out);
  std::cerr << "generated " << g.num_nodes << " nodes, " << g.edges.size()
            << " edges -> " << a.edges_out << "\n";
  return 0;
}

int run_embed(const EmbedArgs& a) {
  EdgeListStats stats;
  Graph g = load_edge_list(a.graph_path, a.num_nodes, &stats);
  if (stats.self_loops_dropped > 0) {
    std::cerr << "warning: dropped " << stats.self_loops_dropped << " self-loops\n";
  }
  EmbeddingMatrix emb;
  if (a.method == "node2vec") {
    Node2vecConfig cfg = a.n2v;
    cfg.dim = a.dim;
    cfg.seed = a.seed;
    emb = node2vec_lite(g, cfg);
  } else if (a.method == "spectral") {
    emb = spectral_embed(g, a.dim);
  } else {
    throw UsageError("unknown embed method '" + a.method + "'");
  }
  write_embedding(emb, a.out);
  return 0;
}

int run_classify(const ClassifyArgs& a) {
  EmbeddingMatrix emb = read_embedding(a.embedding);
  Graph g;
  g.num_nodes = emb.num_nodes();
  g = load_labels(a.labels, std::move(g));

  auto fr = parse_double_list(a.fractions);
  if (fr.size() != 3) throw UsageError("--fractions needs three comma-separated values");
  SplitSpec split = split_nodes(g, {fr[0], fr[1], fr[2]}, a.split_seed);

  TrainConfig cfg = a.train;
  if (a.l2) {
    cfg.l2_strength = *a.l2;
  } else {
    std::vector<double> grid =
        a.l2_grid.empty() ? default_l2_grid() : parse_double_list(a.l2_grid);
    cfg.l2_strength = select_l2(emb.values, g.labels, split, grid, cfg);
    std::cerr << "selected l2_strength = " << cfg.l2_strength << "\n";
  }

  LogRegModel model = train_logreg(emb.values, g.labels, split, cfg);
  const std::vector<bool>& mask = a.mask == "train"  ? split.train_mask
                                  : a.mask == "val"  ? split.val_mask
                                  : a.mask == "test" ? split.test_mask
                                                     : throw UsageError("--mask must be train, val, or test");
  OutputMatrix out = predict_proba(model, emb.values, mask);
  write_output(out, a.out);
  if (!a.labels_out.empty()) {
    auto nodes = mask_indices(mask);
    LabelVector eval_labels;
    for (Index i : nodes) eval_labels.push_back(g.labels[static_cast<std::size_t>(i)]);
    write_eval_labels(nodes, eval_labels, a.labels_out);
  }
  if (!a.model_out.empty()) save_model(model, a.model_out);
  return 0;
}

int run_repsim(const std::string& measure, const std::vector<std::string>& files, int k) {
  if (files.size() != 2) throw UsageError("repsim expects exactly two .emb files");
  EmbeddingMatrix a = read_embedding(files[0]);
  EmbeddingMatrix b = read_embedding(files[1]);
  double v;
  if (measure == "aligned_cos") {
    v = aligned_cosine_similarity(a.values, b.values);
  } else if (measure == "dist_corr") {
    v = distance_correlation(a.values, b.values);
  } else if (measure == "knn_jaccard") {
    v = knn_jaccard(a.values, b.values, k);
  } else if (measure == "second_cos") {
    v = second_order_cosine(a.values, b.values, k);
  } else {
    throw UsageError("unknown representational measure '" + measure + "'");
  }
  print_value(v);
  return 0;
}

int run_funcsim(const std::string& measure, const std::vector<std::string>& files,
                const std::string& labels_path) {
  auto need_labels = [&]() -> LabelVector {
    if (labels_path.empty()) {
      throw UsageError("measure '" + measure + "' requires --labels");
    }
    return read_eval_labels(labels_path, -1);
  };

  double v;
  if (measure == "stable_core") {
    if (files.size() < 2) throw UsageError("stable_core needs at least two .out files");
    std::vector<OutputMatrix> group;
    for (const auto& f : files) group.push_back(read_output(f));
    v = stable_core(group);
  } else if (measure == "accuracy") {
    if (files.size() != 1) throw UsageError("accuracy takes exactly one .out file");
    OutputMatrix o = read_output(files[0]);
    LabelVector labels = need_labels();
    if (static_cast<Index>(labels.size()) != o.num_instances()) {
      throw DataError("label count does not match output rows");
    }
    v = accuracy(o, labels);
  } else {
    if (files.size() != 2) {
      throw UsageError("measure '" + measure + "' expects exactly two .out files");
    }
    OutputMatrix a = read_output(files[0]);
    OutputMatrix b = read_output(files[1]);
    if (measure == "disagreement") {
      v = disagreement(a, b);
    } else if (measure == "jsd") {
      v = mean_jsd(a, b);
    } else if (measure == "norm_disagreement") {
      LabelVector labels = need_labels();
      if (static_cast<Index>(labels.size()) != a.num_instances()) {
        throw DataError("label count does not match output rows");
      }
      v = minmax_normalized_disagreement(a, b, labels);
    } else {
      throw UsageError("unknown functional measure '" + measure + "'");
    }
  }
  print_value(v);
  return 0;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_override,
                  const std::string& format_override, int workers_override) {
  SweepConfig cfg = load_sweep_config(config_path);
  if (!out_override.empty()) cfg.report_path = out_override;
  if (!format_override.empty()) cfg.report_format = format_override;
  if (workers_override > 0) cfg.workers = workers_override;
  if (cfg.report_path.empty()) {
    throw UsageError("no report path: set report.path in the config or pass --out");
  }
  StabilityReport report = run_sweep(cfg);
  emit_report(report, cfg.report_format, cfg.report_path);
  std::cerr << "wrote " << report.rows.size() << " rows -> " << cfg.report_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"embstab: node-embedding stability toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* cmd_gen = app.add_subcommand("gen", "Generate a synthetic SBM graph");
  cmd_gen->add_option("--sbm", gen.blocks, "Comma-separated block sizes, e.g. 150,150")
      ->required();
  cmd_gen->add_option("--p-in", gen.p_in, "Intra-block edge probability");
  cmd_gen->add_option("--p-out", gen.p_out, "Inter-block edge probability");
  cmd_gen->add_option("--seed", gen.seed, "Generator seed");
  cmd_gen->add_option("--edges-out", gen.edges_out, "Edge list output path")->required();
  cmd_gen->add_option("--labels-out", gen.labels_out, "Label file output path");

  EmbedArgs embed;
  Index embed_num_nodes = -1;
  auto* cmd_embed = app.add_subcommand("embed", "Train an embedding");
  cmd_embed->add_option("--graph", embed.graph_path, "Edge list path")->required();
  cmd_embed->add_option("--num-nodes", embed_num_nodes, "Override node count");
  cmd_embed->add_option("--method", embed.method, "node2vec | spectral");
  cmd_embed->add_option("--dim", embed.dim, "Embedding dimension")->required();
  cmd_embed->add_option("--seed", embed.seed, "Training seed");
  cmd_embed->add_option("--out", embed.out, "Embedding output path")->required();
  cmd_embed->add_option("--walks-per-node", embed.n2v.walks_per_node, "Walks per node");
  cmd_embed->add_option("--walk-length", embed.n2v.walk_length, "Walk length");
  cmd_embed->add_option("--context-size", embed.n2v.context_size, "Skip-gram window");
  cmd_embed->add_option("--p", embed.n2v.p, "Return parameter");
  cmd_embed->add_option("--q", embed.n2v.q, "In-out parameter");
  cmd_embed->add_option("--negative-samples", embed.n2v.negative_samples,
                        "Negative samples per pair");
  cmd_embed->add_option("--epochs", embed.n2v.epochs, "Training epochs");
  cmd_embed->add_option("--learning-rate", embed.n2v.learning_rate, "Initial step size");

  ClassifyArgs cls;
  auto* cmd_cls = app.add_subcommand("classify", "Train the downstream classifier");
  cmd_cls->add_option("--embedding", cls.embedding, ".emb input path")->required();
  cmd_cls->add_option("--labels", cls.labels, "Node label file")->required();
  cmd_cls->add_option("--fractions", cls.fractions, "train,val,test fractions");
  cmd_cls->add_option("--split-seed", cls.split_seed, "Split seed");
  double cls_l2 = -1.0;
  auto* l2_opt = cmd_cls->add_option("--l2", cls_l2, "Fixed l2 strength (skips selection)");
  cmd_cls->add_option("--l2-grid", cls.l2_grid, "Comma-separated l2 grid for selection");
  cmd_cls->add_option("--mask", cls.mask, "Which split to score: train|val|test");
  cmd_cls->add_option("--out", cls.out, ".out prediction path")->required();
  cmd_cls->add_option("--labels-out", cls.labels_out, "Eval-instance label file path");
  cmd_cls->add_option("--model-out", cls.model_out, "Model save path");
  cmd_cls->add_option("--learning-rate", cls.train.learning_rate, "Step size");
  cmd_cls->add_option("--max-epochs", cls.train.max_epochs, "Epoch cap");
  cmd_cls->add_option("--tolerance", cls.train.tolerance, "Gradient-norm stop");

  std::string rep_measure;
  std::vector<std::string> rep_files;
  int rep_k = 10;
  auto* cmd_rep = app.add_subcommand("repsim", "Representational similarity of two embeddings");
  cmd_rep->add_option("--measure", rep_measure,
                      "aligned_cos | dist_corr | knn_jaccard | second_cos")
      ->required();
  cmd_rep->add_option("files", rep_files, "Two .emb files");
  cmd_rep->add_option("--k", rep_k, "Neighborhood size (default 10)");

  std::string fun_measure, fun_labels;
  std::vector<std::string> fun_files;
  auto* cmd_fun = app.add_subcommand("funcsim", "Functional similarity of prediction outputs");
  cmd_fun->add_option("--measure", fun_measure,
                      "disagreement | norm_disagreement | stable_core | jsd | accuracy")
      ->required();
  cmd_fun->add_option("files", fun_files, ".out files");
  cmd_fun->add_option("--labels", fun_labels, "Eval-instance label file");

  std::string sweep_config, sweep_out, sweep_format;
  int sweep_workers = 0;
  auto* cmd_sweep = app.add_subcommand("sweep", "Run a dimension sweep from a JSON config");
  cmd_sweep->add_option("--config", sweep_config, "Sweep config JSON")->required();
  cmd_sweep->add_option("--out", sweep_out, "Report path (overrides config)");
  cmd_sweep->add_option("--format", sweep_format, "csv | json (overrides config)");
  cmd_sweep->add_option("--workers", sweep_workers, "Worker threads")
      ->envname("EMBSTAB_WORKERS");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(cmd_gen)) return run_gen(gen);
    if (app.got_subcommand(cmd_embed)) {
      if (embed_num_nodes >= 0) embed.num_nodes = embed_num_nodes;
      return run_embed(embed);
    }
    if (app.got_subcommand(cmd_cls)) {
      if (l2_opt->count() > 0) cls.l2 = cls_l2;
      return run_classify(cls);
    }
    if (app.got_subcommand(cmd_rep)) return run_repsim(rep_measure, rep_files, rep_k);
    if (app.got_subcommand(cmd_fun)) return run_funcsim(fun_measure, fun_files, fun_labels);
    if (app.got_subcommand(cmd_sweep)) {
      return run_sweep_cmd(sweep_config, sweep_out, sweep_format, sweep_workers);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
