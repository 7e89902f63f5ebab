#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "warga/evaluation.hpp"
#include "warga/graph.hpp"
#include "warga/training.hpp"

namespace warga {

// A multi-seed experiment on one dataset (a prepared directory or an SBM
// spec). Run i trains with seeds[i] and splits with split_seed + i, so two
// models configured with the same split_seed and seed count compare on
// identical splits.
struct ExperimentConfig {
  std::string data_dir;          // directory with edges.txt / features.txt [/ labels.txt]
  std::optional<SbmSpec> sbm;    // used when data_dir is empty
  TrainConfig train;
  std::vector<std::uint64_t> seeds = {0};
  std::uint64_t split_seed = 0;
  double val_frac = 0.05;
  double test_frac = 0.10;
  std::string out_dir = "runs";
  int kmeans_restarts = 10;

  void validate() const;
};

struct ExperimentResult {
  MetricsReport report;
  std::vector<std::string> run_dirs;
  std::string aggregate_path;
  std::string table_path;
};

// Trains every seed, writes per-run artifacts (config.json, checkpoint.json,
// embedding.txt, losses.csv, val.csv, metrics.json) and the aggregate
// report; returns the collected metrics.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

struct SweepSpec {
  std::vector<int> hidden_widths = {32, 64, 128};
  std::vector<int> embed_widths = {16, 32, 64, 128};
  ExperimentConfig base;
};

struct SweepCell {
  int hidden = 0;
  int embed = 0;
  double mean_auc = 0.0;
  double mean_ap = 0.0;
  double std_auc = 0.0;
  double std_ap = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::string csv_path;
  std::string json_path;
};

SweepResult run_sweep(const SweepSpec& spec, std::ostream* log = nullptr);

struct EvalRequest {
  std::string checkpoint;  // exactly one of checkpoint / embedding
  std::string embedding;
  std::string data_dir;
  std::uint64_t split_seed = 0;
  std::uint64_t cluster_seed = 0;
  int kmeans_restarts = 10;
  double val_frac = 0.05;
  double test_frac = 0.10;
  std::string out_path;  // optional metrics JSON destination
};

// Recomputes link (and, with labels, clustering) metrics without retraining.
std::map<std::string, double> run_eval(const EvalRequest& req, std::ostream* log = nullptr);

struct Manifest {
  long nodes = 0;
  long undirected_edges = 0;
  long features = 0;
  long classes = 0;
  long skipped_edge_endpoints = 0;  // converter: citations to unknown ids
};

// Converts a raw dataset directory (either <name>.content + <name>.cites, or
// already-formatted edges.txt/features.txt) into canonical files plus
// manifest.json. Byte-identical on re-runs.
Manifest prepare_dataset(const std::string& raw_dir, const std::string& out_dir);

// Generates an SBM graph and writes it in the canonical dataset format.
Manifest write_synth(const SbmSpec& spec, const std::string& out_dir);

Graph load_dataset_dir(const std::string& dir);

// Cora/Citeseer run with the 200-epoch / 1e-3 schedule; PubMed switches to
// 1500 epochs at 5e-3. Only fields the user left at their defaults change,
// and the chosen schedule is echoed to the log.
void apply_dataset_profile(TrainConfig& cfg, const std::string& dataset_name,
                           bool epochs_overridden, bool lr_overridden,
                           std::ostream* log = nullptr);

// Plain-text table: means in percent, standard deviations in decimal.
std::string format_metrics_table(const MetricsReport& report, const std::string& title);

}  // namespace warga
