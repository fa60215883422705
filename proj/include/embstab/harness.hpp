#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "embstab/classify.hpp"
#include "embstab/embedding.hpp"
#include "embstab/graph.hpp"
#include "embstab/types.hpp"

namespace embstab {

/// Either a pair of files or an SBM generator config.
struct SweepDataset {
  std::string name = "dataset";
  std::string edges_path;
  std::string labels_path;
  std::optional<SbmConfig> sbm;
};

struct SweepConfig {
  SweepDataset dataset;
  std::string method = "node2vec";  // node2vec | spectral | external
  std::string method_name;          // report label and file-name token; defaults to method
  std::string external_dir;
  std::vector<Index> dims;
  int runs_per_dim = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::string> measures;  // empty selects every known measure
  int knn_k = 10;
  std::vector<double> l2_grid;  // empty selects the default grid
  std::array<double, 3> split_fractions = {0.7, 0.1, 0.2};
  std::uint64_t split_seed = 0;
  Node2vecConfig node2vec;   // dim and seed are overridden per run
  TrainConfig classifier;    // l2_strength is overridden by grid selection
  std::string tuning_mode = "anchor";  // anchor | per_dim
  Index anchor_dim = 128;
  bool timing = false;
  int workers = 0;  // 0 = available parallelism
  std::string work_dir;
  bool keep_work_dir = false;
  std::string report_path;
  std::string report_format = "csv";

  void validate() const;
};

/// Parses and validates a sweep config from a JSON file. Unknown keys are
/// rejected so typos fail before any work starts.
SweepConfig load_sweep_config(const std::string& path);

const std::vector<std::string>& all_measure_names();
const std::vector<double>& default_l2_grid();
bool is_representational(const std::string& measure);

struct ReportRow {
  std::string dataset;
  std::string method;
  Index dim = 0;
  std::string measure;
  double mean = 0.0;
  double std_dev = 0.0;
  long n = 0;
  std::string optimal_flag;
  double elapsed_seconds = 0.0;
};

struct StabilityReport {
  std::vector<ReportRow> rows;
};

/// Mean and population standard deviation with compensated summation.
std::pair<double, double> pairwise_aggregate(const std::vector<double>& values);

/// Flags, per (dataset, method), the dimension with the best mean accuracy
/// as "optimal" (ties to the smallest dimension) and every dimension within
/// 0.01 of it as "near_optimal". Throws DataError when the report has no
/// accuracy rows.
void mark_optimum(StabilityReport& report);

std::string report_to_csv(const StabilityReport& report);
void emit_report(const StabilityReport& report, const std::string& format,
                 const std::string& path);
StabilityReport load_report_json(const std::string& path);

/// Runs the full protocol: per dimension, runs_per_dim seeded embeddings,
/// one downstream classifier per embedding, all selected measures over all
/// unordered run pairs plus the group stable core and mean accuracy.
/// Deterministic given the config; independent of worker count.
StabilityReport run_sweep(const SweepConfig& config);

}  // namespace embstab
