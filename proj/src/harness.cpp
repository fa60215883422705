#include "embstab/harness.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "embstab/funcsim.hpp"
#include "embstab/io_util.hpp"
#include "embstab/kahan.hpp"
#include "embstab/parallel.hpp"
#include "embstab/repsim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace embstab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kMeasures = {
    "aligned_cos", "dist_corr",        "knn_jaccard", "second_cos", "disagreement",
    "norm_disagreement", "stable_core", "jsd",        "accuracy"};

bool is_pairwise_functional(const std::string& m) {
  return m == "disagreement" || m == "norm_disagreement" || m == "jsd";
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

fs::path make_temp_dir() {
  const fs::path base = fs::temp_directory_path();
  for (int i = 0; i < 100000; ++i) {
    fs::path p = base / ("embstab-" + std::to_string(::getpid()) + "-" + std::to_string(i));
    std::error_code ec;
    if (fs::create_directory(p, ec)) return p;
  }
  throw DataError("cannot create a temporary work directory");
}

}  // namespace

const std::vector<std::string>& all_measure_names() { return kMeasures; }

const std::vector<double>& default_l2_grid() {
  // Inverse of the C grid {10^i : -8 <= i <= 5}: l2_strength = 1/C.
  static const std::vector<double> grid = [] {
    std::vector<double> g;
    for (int i = -8; i <= 5; ++i) g.push_back(std::pow(10.0, -i));
    return g;
  }();
  return grid;
}

bool is_representational(const std::string& measure) {
  return measure == "aligned_cos" || measure == "dist_corr" ||
         measure == "knn_jaccard" || measure == "second_cos";
}

void SweepConfig::validate() const {
  if (method != "node2vec" && method != "spectral" && method != "external") {
    throw DataError("sweep: unknown method '" + method + "'");
  }
  if (method == "external" && external_dir.empty()) {
    throw DataError("sweep: external method requires external.dir");
  }
  if (method != "external" && !dataset.sbm && dataset.edges_path.empty()) {
    throw DataError("sweep: dataset needs either 'sbm' or 'edges'");
  }
  if (dataset.name.empty() || dataset.name.find(',') != std::string::npos ||
      dataset.name.find('\n') != std::string::npos) {
    throw DataError("sweep: dataset.name must be nonempty and free of commas");
  }
  if (dims.empty()) throw DataError("sweep: dims must be nonempty");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 1) throw DataError("sweep: dims must be positive");
    if (i > 0 && dims[i] <= dims[i - 1]) {
      throw DataError("sweep: dims must be strictly increasing");
    }
  }
  if (runs_per_dim < 2) throw DataError("sweep: runs_per_dim must be >= 2");
  if (knn_k < 1) throw DataError("sweep: knn_k must be >= 1");
  for (const auto& m : measures) {
    if (std::find(kMeasures.begin(), kMeasures.end(), m) == kMeasures.end()) {
      throw DataError("sweep: unknown measure '" + m + "'");
    }
  }
  for (double l2 : l2_grid) {
    if (l2 < 0.0) throw DataError("sweep: l2 grid values must be >= 0");
  }
  double fsum = split_fractions[0] + split_fractions[1] + split_fractions[2];
  if (split_fractions[0] < 0 || split_fractions[1] < 0 || split_fractions[2] < 0 ||
      fsum > 1.0 + 1e-12) {
    throw DataError("sweep: split fractions must be nonnegative with sum <= 1");
  }
  if (tuning_mode != "anchor" && tuning_mode != "per_dim") {
    throw DataError("sweep: tuning mode must be 'anchor' or 'per_dim'");
  }
  if (anchor_dim < 1) throw DataError("sweep: anchor_dim must be >= 1");
  if (workers < 0) throw DataError("sweep: workers must be >= 0");
  if (report_format != "csv" && report_format != "json") {
    throw DataError("sweep: report format must be 'csv' or 'json'");
  }
}

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw DataError("sweep config: unknown key '" + it.key() + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError("sweep config: bad value for '" + key + "'");
  }
}

}  // namespace

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sweep config: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("sweep config: " + std::string(e.what()));
  }
  if (!j.is_object()) throw DataError("sweep config: top level must be an object");
  reject_unknown_keys(j, {"dataset", "method", "method_name", "external", "dims",
                          "runs_per_dim", "base_seed", "measures", "knn_k", "l2_grid",
                          "split", "node2vec", "classifier", "tuning", "timing",
                          "workers", "work_dir", "keep_work_dir", "report"},
                      "top level");

  SweepConfig cfg;
  if (!j.contains("dataset") || !j.at("dataset").is_object()) {
    throw DataError("sweep config: 'dataset' object is required");
  }
  const json& ds = j.at("dataset");
  reject_unknown_keys(ds, {"name", "edges", "labels", "sbm"}, "dataset");
  cfg.dataset.name = get_or<std::string>(ds, "name", "");
  cfg.dataset.edges_path = get_or<std::string>(ds, "edges", "");
  cfg.dataset.labels_path = get_or<std::string>(ds, "labels", "");
  if (ds.contains("sbm")) {
    const json& sb = ds.at("sbm");
    reject_unknown_keys(sb, {"block_sizes", "p_in", "p_out", "seed"}, "dataset.sbm");
    SbmConfig sbm;
    sbm.block_sizes = get_or<std::vector<Index>>(sb, "block_sizes", {});
    sbm.p_in = get_or<double>(sb, "p_in", 0.0);
    sbm.p_out = get_or<double>(sb, "p_out", 0.0);
    sbm.seed = get_or<std::uint64_t>(sb, "seed", 0);
    cfg.dataset.sbm = sbm;
  }
  if (cfg.dataset.name.empty()) throw DataError("sweep config: dataset.name is required");

  cfg.method = get_or<std::string>(j, "method", "");
  cfg.method_name = get_or<std::string>(j, "method_name", cfg.method);
  if (j.contains("external")) {
    const json& ex = j.at("external");
    reject_unknown_keys(ex, {"dir"}, "external");
    cfg.external_dir = get_or<std::string>(ex, "dir", "");
  }
  cfg.dims = get_or<std::vector<Index>>(j, "dims", {});
  cfg.runs_per_dim = get_or<int>(j, "runs_per_dim", 0);
  cfg.base_seed = get_or<std::uint64_t>(j, "base_seed", 0);
  cfg.measures = get_or<std::vector<std::string>>(j, "measures", {});
  cfg.knn_k = get_or<int>(j, "knn_k", 10);
  cfg.l2_grid = get_or<std::vector<double>>(j, "l2_grid", {});
  if (j.contains("split")) {
    const json& sp = j.at("split");
    reject_unknown_keys(sp, {"fractions", "seed"}, "split");
    auto fr = get_or<std::vector<double>>(sp, "fractions", {0.7, 0.1, 0.2});
    if (fr.size() != 3) throw DataError("sweep config: split.fractions needs 3 entries");
    cfg.split_fractions = {fr[0], fr[1], fr[2]};
    cfg.split_seed = get_or<std::uint64_t>(sp, "seed", 0);
  }
  if (j.contains("node2vec")) {
    const json& nv = j.at("node2vec");
    reject_unknown_keys(nv,
                        {"walks_per_node", "walk_length", "context_size", "p", "q",
                         "negative_samples", "epochs", "learning_rate"},
                        "node2vec");
    cfg.node2vec.walks_per_node = get_or<int>(nv, "walks_per_node", cfg.node2vec.walks_per_node);
    cfg.node2vec.walk_length = get_or<int>(nv, "walk_length", cfg.node2vec.walk_length);
    cfg.node2vec.context_size = get_or<int>(nv, "context_size", cfg.node2vec.context_size);
    cfg.node2vec.p = get_or<double>(nv, "p", cfg.node2vec.p);
    cfg.node2vec.q = get_or<double>(nv, "q", cfg.node2vec.q);
    cfg.node2vec.negative_samples =
        get_or<int>(nv, "negative_samples", cfg.node2vec.negative_samples);
    cfg.node2vec.epochs = get_or<int>(nv, "epochs", cfg.node2vec.epochs);
    cfg.node2vec.learning_rate =
        get_or<double>(nv, "learning_rate", cfg.node2vec.learning_rate);
  }
  if (j.contains("classifier")) {
    const json& cl = j.at("classifier");
    reject_unknown_keys(cl, {"learning_rate", "max_epochs", "tolerance"}, "classifier");
    cfg.classifier.learning_rate =
        get_or<double>(cl, "learning_rate", cfg.classifier.learning_rate);
    cfg.classifier.max_epochs = get_or<int>(cl, "max_epochs", cfg.classifier.max_epochs);
    cfg.classifier.tolerance = get_or<double>(cl, "tolerance", cfg.classifier.tolerance);
  }
  if (j.contains("tuning")) {
    const json& tu = j.at("tuning");
    reject_unknown_keys(tu, {"mode", "anchor_dim"}, "tuning");
    cfg.tuning_mode = get_or<std::string>(tu, "mode", cfg.tuning_mode);
    cfg.anchor_dim = get_or<Index>(tu, "anchor_dim", cfg.anchor_dim);
  }
  cfg.timing = get_or<bool>(j, "timing", false);
  cfg.workers = get_or<int>(j, "workers", 0);
  cfg.work_dir = get_or<std::string>(j, "work_dir", "");
  cfg.keep_work_dir = get_or<bool>(j, "keep_work_dir", false);
  if (j.contains("report")) {
    const json& rp = j.at("report");
    reject_unknown_keys(rp, {"path", "format"}, "report");
    cfg.report_path = get_or<std::string>(rp, "path", "");
    cfg.report_format = get_or<std::string>(rp, "format", "csv");
  }
  cfg.validate();
  return cfg;
}

std::pair<double, double> pairwise_aggregate(const std::vector<double>& values) {
  if (values.empty()) throw DataError("pairwise_aggregate: empty value list");
  KahanSum sum;
  for (double v : values) sum.add(v);
  const double mean = sum.value() / static_cast<double>(values.size());
  KahanSum sq;
  for (double v : values) sq.add((v - mean) * (v - mean));
  const double var = sq.value() / static_cast<double>(values.size());
  return {mean, var > 0.0 ? std::sqrt(var) : 0.0};
}

void mark_optimum(StabilityReport& report) {
  struct AccCell {
    Index dim;
    double mean;
  };
  std::map<std::pair<std::string, std::string>, std::vector<AccCell>> groups;
  for (const auto& row : report.rows) {
    if (row.measure == "accuracy" && std::isfinite(row.mean)) {
      groups[{row.dataset, row.method}].push_back({row.dim, row.mean});
    }
  }
  if (groups.empty()) throw DataError("mark_optimum: report has no accuracy rows");

  for (const auto& [key, cells] : groups) {
    Index best_dim = cells.front().dim;
    double best_mean = cells.front().mean;
    for (const auto& c : cells) {
      if (c.mean > best_mean || (c.mean == best_mean && c.dim < best_dim)) {
        best_mean = c.mean;
        best_dim = c.dim;
      }
    }
    std::set<Index> near;
    for (const auto& c : cells) {
      if (c.dim != best_dim && c.mean >= best_mean - 0.01) near.insert(c.dim);
    }
    for (auto& row : report.rows) {
      if (row.dataset != key.first || row.method != key.second) continue;
      if (row.dim == best_dim) {
        row.optimal_flag = "optimal";
      } else if (near.count(row.dim)) {
        row.optimal_flag = "near_optimal";
      }
    }
  }
}

std::string report_to_csv(const StabilityReport& report) {
  std::ostringstream out;
  out << "dataset,method,dim,measure,mean,std,n,optimal_flag,elapsed_seconds\n";
  for (const auto& row : report.rows) {
    out << row.dataset << ',' << row.method << ',' << row.dim << ',' << row.measure
        << ',' << format_g17(row.mean) << ',' << format_g17(row.std_dev) << ',' << row.n
        << ',' << row.optimal_flag << ',' << format_g17(row.elapsed_seconds) << '\n';
  }
  return out.str();
}

namespace {

json report_to_json(const StabilityReport& report) {
  json arr = json::array();
  for (const auto& row : report.rows) {
    json o;
    o["dataset"] = row.dataset;
    o["method"] = row.method;
    o["dim"] = row.dim;
    o["measure"] = row.measure;
    o["mean"] = row.mean;  // non-finite values serialize as null
    o["std"] = row.std_dev;
    o["n"] = row.n;
    o["optimal_flag"] = row.optimal_flag;
    o["elapsed_seconds"] = row.elapsed_seconds;
    arr.push_back(std::move(o));
  }
  return arr;
}

double json_number(const json& v) {
  return v.is_null() ? kNaN : v.get<double>();
}

}  // namespace

void emit_report(const StabilityReport& report, const std::string& format,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write report: " + path);
  if (format == "csv") {
    out << report_to_csv(report);
  } else if (format == "json") {
    out << report_to_json(report).dump(2) << "\n";
  } else {
    throw DataError("emit_report: unknown format '" + format + "'");
  }
  if (!out) throw DataError("write failed: " + path);
}

StabilityReport load_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open report: " + path);
  json arr;
  try {
    in >> arr;
  } catch (const json::exception& e) {
    throw DataError("report json: " + std::string(e.what()));
  }
  if (!arr.is_array()) throw DataError("report json: expected an array of rows");
  StabilityReport report;
  for (const auto& o : arr) {
    ReportRow row;
    row.dataset = o.at("dataset").get<std::string>();
    row.method = o.at("method").get<std::string>();
    row.dim = o.at("dim").get<Index>();
    row.measure = o.at("measure").get<std::string>();
    row.mean = json_number(o.at("mean"));
    row.std_dev = json_number(o.at("std"));
    row.n = o.at("n").get<long>();
    row.optimal_flag = o.at("optimal_flag").get<std::string>();
    row.elapsed_seconds = json_number(o.at("elapsed_seconds"));
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

struct RunArtifacts {
  std::optional<OutputMatrix> output;
  double accuracy = kNaN;
  double classify_seconds = 0.0;
};

Index clamp_to_grid(Index anchor, const std::vector<Index>& dims) {
  Index best = dims.front();
  for (Index d : dims) {
    Index cur = std::abs(best - anchor);
    Index cand = std::abs(d - anchor);
    if (cand < cur || (cand == cur && d > best)) best = d;
  }
  return best;
}

}  // namespace

StabilityReport run_sweep(const SweepConfig& input) {
  SweepConfig cfg = input;
  if (cfg.method_name.empty()) cfg.method_name = cfg.method;
  if (cfg.measures.empty()) cfg.measures = all_measure_names();
  if (cfg.l2_grid.empty()) cfg.l2_grid = default_l2_grid();
  cfg.validate();

  const bool external = cfg.method == "external";
  bool funcsim_requested = false;
  bool accuracy_requested = false;
  bool repsim_requested = false;
  for (const auto& m : cfg.measures) {
    if (is_representational(m)) repsim_requested = true;
    if (is_pairwise_functional(m) || m == "stable_core") funcsim_requested = true;
    if (m == "accuracy") accuracy_requested = true;
  }
  const bool outputs_needed = funcsim_requested || accuracy_requested;

  // Graph and split (internal methods only; external mode works off files).
  Graph graph;
  SplitSpec split;
  LabelVector test_labels;
  if (!external) {
    if (cfg.dataset.sbm) {
      graph = generate_sbm(*cfg.dataset.sbm);
    } else {
      graph = load_edge_list(cfg.dataset.edges_path);
      if (!cfg.dataset.labels_path.empty()) {
        graph = load_labels(cfg.dataset.labels_path, graph);
      }
    }
    if (outputs_needed) {
      if (!graph.has_labels()) {
        throw DataError("sweep: functional measures and accuracy need node labels");
      }
      split = split_nodes(graph, cfg.split_fractions, cfg.split_seed);
      for (Index i : mask_indices(split.test_mask)) {
        test_labels.push_back(graph.labels[static_cast<std::size_t>(i)]);
      }
      if (test_labels.empty()) throw DataError("sweep: empty test split");
    }
  }

  fs::path work;
  bool scratch_work_dir = false;
  if (external) {
    work = cfg.external_dir;
    if (!fs::is_directory(work)) {
      throw DataError("sweep: external dir not found: " + cfg.external_dir);
    }
  } else if (!cfg.work_dir.empty()) {
    work = cfg.work_dir;
    fs::create_directories(work);
  } else {
    work = make_temp_dir();
    scratch_work_dir = true;
  }

  auto emb_path = [&](Index dim, int run) {
    return (work / (cfg.method_name + "_d" + std::to_string(dim) + "_s" +
                    std::to_string(run) + ".emb"))
        .string();
  };
  auto out_path = [&](Index dim, int run) {
    return (work / (cfg.method_name + "_d" + std::to_string(dim) + "_s" +
                    std::to_string(run) + ".out"))
        .string();
  };

  std::set<std::string> produced;
  auto make_embedding = [&](Index dim, int run) {
    const std::string path = emb_path(dim, run);
    if (external) {
      if (!fs::exists(path)) throw DataError("sweep: missing external embedding " + path);
      return;
    }
    if (produced.count(path)) return;
    EmbeddingMatrix emb;
    if (cfg.method == "spectral") {
      emb = spectral_embed(graph, dim);
    } else {
      Node2vecConfig nc = cfg.node2vec;
      nc.dim = dim;
      nc.seed = cfg.base_seed + static_cast<std::uint64_t>(run);
      emb = node2vec_lite(graph, nc);
    }
    write_embedding(emb, path);
  };

  const int R = cfg.runs_per_dim;
  auto log_cell = [&](const ReportRow& row) {
    std::cerr << "[sweep] " << row.dataset << " " << row.method << " dim=" << row.dim
              << " " << row.measure << " mean=" << row.mean << " n=" << row.n << "\n";
  };

  // Classifier hyperparameter: tuned once at the anchor dimension (clamped
  // to the grid) or once per dimension on run 0, then held fixed.
  double anchor_l2 = kNaN;
  if (outputs_needed && !external && cfg.tuning_mode == "anchor") {
    const Index anchor = clamp_to_grid(cfg.anchor_dim, cfg.dims);
    make_embedding(anchor, 0);
    produced.insert(emb_path(anchor, 0));
    EmbeddingMatrix emb = read_embedding(emb_path(anchor, 0));
    anchor_l2 = select_l2(emb.values, graph.labels, split, cfg.l2_grid, cfg.classifier);
  }

  // External functional labels, when provided.
  LabelVector external_labels;
  bool have_external_labels = false;
  if (external && outputs_needed) {
    fs::path lp = work / "eval.labels";
    if (fs::exists(lp)) {
      external_labels = read_eval_labels(lp.string(), -1);
      have_external_labels = true;
    }
  }

  StabilityReport report;
  for (Index dim : cfg.dims) {
    // Phase 1a: embeddings, parallel over runs.
    parallel_for(static_cast<std::size_t>(R), cfg.workers,
                 [&](std::size_t r) { make_embedding(dim, static_cast<int>(r)); });
    for (int r = 0; r < R; ++r) produced.insert(emb_path(dim, r));

    // Phase 1b: downstream classifiers, parallel over runs.
    std::vector<RunArtifacts> runs(static_cast<std::size_t>(R));
    if (outputs_needed && !external) {
      double l2 = anchor_l2;
      if (cfg.tuning_mode == "per_dim") {
        EmbeddingMatrix emb = read_embedding(emb_path(dim, 0));
        l2 = select_l2(emb.values, graph.labels, split, cfg.l2_grid, cfg.classifier);
      }
      parallel_for(static_cast<std::size_t>(R), cfg.workers, [&](std::size_t r) {
        auto& slot = runs[r];
        const double t0 = now_seconds();
        try {
          EmbeddingMatrix emb = read_embedding(emb_path(dim, static_cast<int>(r)));
          TrainConfig tc = cfg.classifier;
          tc.l2_strength = l2;
          LogRegModel model = train_logreg(emb.values, graph.labels, split, tc);
          OutputMatrix out = predict_proba(model, emb.values, split.test_mask);
          slot.accuracy = accuracy(out, test_labels);
          slot.output = std::move(out);
        } catch (const NumericError&) {
        } catch (const DataError&) {
        }
        slot.classify_seconds = now_seconds() - t0;
      });
    } else if (outputs_needed && external) {
      parallel_for(static_cast<std::size_t>(R), cfg.workers, [&](std::size_t r) {
        auto& slot = runs[r];
        const std::string path = out_path(dim, static_cast<int>(r));
        if (!fs::exists(path)) {
          throw DataError("sweep: missing external output " + path);
        }
        const double t0 = now_seconds();
        OutputMatrix out = read_output(path);
        if (have_external_labels) {
          if (static_cast<Index>(external_labels.size()) != out.num_instances()) {
            throw DataError("sweep: eval.labels row count does not match " + path);
          }
          slot.accuracy = accuracy(out, external_labels);
        }
        slot.output = std::move(out);
        slot.classify_seconds = now_seconds() - t0;
      });
    }
    const LabelVector& func_labels = external ? external_labels : test_labels;

    // Phase 2: measures over unordered run pairs, parallel over pairs.
    std::vector<std::pair<int, int>> pairs;
    for (int r = 0; r < R; ++r) {
      for (int s = r + 1; s < R; ++s) pairs.emplace_back(r, s);
    }
    std::vector<std::string> pair_measures;
    for (const auto& m : cfg.measures) {
      if (is_representational(m) || is_pairwise_functional(m)) pair_measures.push_back(m);
    }
    std::map<std::string, std::vector<double>> values;
    std::map<std::string, std::vector<double>> seconds;
    for (const auto& m : pair_measures) {
      values[m].assign(pairs.size(), kNaN);
      seconds[m].assign(pairs.size(), 0.0);
    }

    parallel_for(pairs.size(), cfg.workers, [&](std::size_t p) {
      const auto [r, s] = pairs[p];
      EmbeddingMatrix za, zb;
      if (repsim_requested) {
        za = read_embedding(emb_path(dim, r));
        zb = read_embedding(emb_path(dim, s));
      }
      for (const auto& m : pair_measures) {
        const double t0 = now_seconds();
        double v = kNaN;
        try {
          if (m == "aligned_cos") {
            v = aligned_cosine_similarity(za.values, zb.values);
          } else if (m == "dist_corr") {
            v = distance_correlation(za.values, zb.values);
          } else if (m == "knn_jaccard") {
            v = knn_jaccard(za.values, zb.values, cfg.knn_k);
          } else if (m == "second_cos") {
            v = second_order_cosine(za.values, zb.values, cfg.knn_k);
          } else if (runs[static_cast<std::size_t>(r)].output &&
                     runs[static_cast<std::size_t>(s)].output) {
            const auto& oa = *runs[static_cast<std::size_t>(r)].output;
            const auto& ob = *runs[static_cast<std::size_t>(s)].output;
            if (m == "disagreement") {
              v = disagreement(oa, ob);
            } else if (m == "jsd") {
              v = mean_jsd(oa, ob);
            } else if (m == "norm_disagreement" &&
                       (!external || have_external_labels)) {
              v = minmax_normalized_disagreement(oa, ob, func_labels);
            }
          }
        } catch (const NumericError&) {
          v = kNaN;
        }
        values.at(m)[p] = v;
        seconds.at(m)[p] = now_seconds() - t0;
      }
    });

    // Aggregate rows in the configured measure order.
    for (const auto& m : cfg.measures) {
      ReportRow row;
      row.dataset = cfg.dataset.name;
      row.method = cfg.method_name;
      row.dim = dim;
      row.measure = m;
      row.mean = kNaN;
      row.std_dev = kNaN;
      row.n = 0;

      double elapsed = 0.0;
      if (is_representational(m) || is_pairwise_functional(m)) {
        // n carries the design pair count R(R-1)/2; pairs whose measure is
        // undefined only thin out the aggregate, flagged by the log line.
        row.n = static_cast<long>(pairs.size());
        std::vector<double> ok;
        for (double v : values.at(m)) {
          if (std::isfinite(v)) ok.push_back(v);
        }
        for (double t : seconds.at(m)) elapsed += t;
        if (!ok.empty()) {
          auto [mean, sd] = pairwise_aggregate(ok);
          row.mean = mean;
          row.std_dev = sd;
        }
        if (ok.size() < pairs.size()) {
          std::cerr << "[sweep] " << cfg.dataset.name << " " << cfg.method_name
                    << " dim=" << dim << " " << m << ": "
                    << pairs.size() - ok.size() << " of " << pairs.size()
                    << " pairs undefined\n";
        }
      } else if (m == "stable_core") {
        bool all_present = true;
        std::vector<OutputMatrix> group;
        for (const auto& run : runs) {
          if (run.output) {
            group.push_back(*run.output);
          } else {
            all_present = false;
          }
        }
        row.n = 1;  // n_group
        const double t0 = now_seconds();
        if (all_present && group.size() >= 2) {
          try {
            row.mean = stable_core(group);
            row.std_dev = 0.0;
          } catch (const NumericError&) {
          }
        }
        elapsed = now_seconds() - t0;
      } else if (m == "accuracy") {
        row.n = R;
        std::vector<double> ok;
        for (const auto& run : runs) {
          if (std::isfinite(run.accuracy)) ok.push_back(run.accuracy);
          elapsed += run.classify_seconds;
        }
        if (!ok.empty()) {
          auto [mean, sd] = pairwise_aggregate(ok);
          row.mean = mean;
          row.std_dev = sd;
        }
      }
      row.elapsed_seconds = cfg.timing ? elapsed : 0.0;
      log_cell(row);
      report.rows.push_back(std::move(row));
    }
  }

  bool have_accuracy = false;
  for (const auto& row : report.rows) {
    if (row.measure == "accuracy" && std::isfinite(row.mean)) have_accuracy = true;
  }
  if (have_accuracy) mark_optimum(report);

  if (scratch_work_dir && !cfg.keep_work_dir) {
    std::error_code ec;
    fs::remove_all(work, ec);
  }
  return report;
}

}  // namespace embstab
