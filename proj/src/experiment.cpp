#include "warga/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "warga/io.hpp"
#include "warga/linalg.hpp"
#include "warga/version.hpp"

namespace warga {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

// Canonical dataset files from an in-memory graph. Sparse triplet features
// unless the matrix is over half dense.
Manifest write_graph_files(const Graph& g, const std::string& out_dir) {
  fs::create_directories(out_dir);

  const EdgeList edges = undirected_edges(g.adjacency);
  {
    std::ostringstream os;
    os << "# edges: one 'u v' pair per line, 0-based undirected\n";
    for (const auto& [u, v] : edges) os << u << " " << v << "\n";
    write_text_file((fs::path(out_dir) / "edges.txt").string(), os.str());
  }
  {
    std::ostringstream os;
    const Index n = g.features.rows(), c = g.features.cols();
    long nnz = 0;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < c; ++j)
        if (g.features(i, j) != 0.0) ++nnz;
    if (nnz * 2 > n * c) {
      os << "DENSE " << n << " " << c << "\n";
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < c; ++j)
          os << fmt_double(g.features(i, j)) << (j + 1 == c ? "" : " ");
        os << "\n";
      }
    } else {
      os << n << " " << c << "\n";
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < c; ++j)
          if (g.features(i, j) != 0.0)
            os << i << " " << j << " " << fmt_double(g.features(i, j)) << "\n";
    }
    write_text_file((fs::path(out_dir) / "features.txt").string(), os.str());
  }
  if (g.has_labels()) {
    std::ostringstream os;
    for (int l : g.labels) os << l << "\n";
    write_text_file((fs::path(out_dir) / "labels.txt").string(), os.str());
  }

  Manifest m;
  m.nodes = g.n_nodes;
  m.undirected_edges = static_cast<long>(edges.size());
  m.features = g.features.cols();
  m.classes = g.n_classes;
  json j{{"nodes", m.nodes},
         {"undirected_edges", m.undirected_edges},
         {"features", m.features},
         {"classes", m.classes}};
  write_json_file((fs::path(out_dir) / "manifest.json").string(), j);
  return m;
}

json experiment_config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["version"] = kVersion;
  j["data_dir"] = cfg.data_dir;
  if (cfg.sbm) {
    j["sbm"] = {{"block_sizes", cfg.sbm->block_sizes},
                {"p_in", cfg.sbm->p_in},
                {"p_out", cfg.sbm->p_out},
                {"seed", cfg.sbm->seed},
                {"features",
                 cfg.sbm->feature_mode == SbmSpec::Features::Identity ? "identity"
                                                                      : "onehot"}};
  }
  j["train"] = train_config_to_json(cfg.train);
  j["seeds"] = cfg.seeds;
  j["split_seed"] = cfg.split_seed;
  j["val_frac"] = cfg.val_frac;
  j["test_frac"] = cfg.test_frac;
  j["out_dir"] = cfg.out_dir;
  j["kmeans_restarts"] = cfg.kmeans_restarts;
  return j;
}

std::map<std::string, double> evaluate_embedding(const Matrix& z, const EdgeSplit& split,
                                                 const Graph& g, std::uint64_t cluster_seed,
                                                 int restarts) {
  std::map<std::string, double> metrics;
  const ScoredEdges scored = score_edges(z, split.test_pos, split.test_neg);
  metrics["auc"] = auc(scored);
  metrics["ap"] = average_precision(scored);
  if (g.has_labels() && g.n_classes >= 2) {
    Rng rng(cluster_seed);
    const ClusterAssignment assign = kmeans(z, g.n_classes, rng, restarts);
    metrics["acc"] = clustering_accuracy(assign.labels, g.labels);
    metrics["nmi"] = nmi(assign.labels, g.labels);
    metrics["ari"] = ari(assign.labels, g.labels);
  }
  return metrics;
}

std::string losses_csv(const TrainReport& report) {
  std::ostringstream os;
  os << "epoch,reconstruction,regularizer,total\n";
  for (std::size_t i = 0; i < report.losses.size(); ++i) {
    const auto& l = report.losses[i];
    os << (i + 1) << "," << fmt_double(l.reconstruction) << ","
       << fmt_double(l.regularizer) << "," << fmt_double(l.total) << "\n";
  }
  return os.str();
}

std::string val_csv(const TrainReport& report) {
  std::ostringstream os;
  os << "epoch,val_auc,val_ap\n";
  for (const auto& v : report.val_history)
    os << v.epoch << "," << fmt_double(v.auc) << "," << fmt_double(v.ap) << "\n";
  return os.str();
}

}  // namespace

void ExperimentConfig::validate() const {
  require_shape(!seeds.empty(), "experiment: seed list is empty");
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  require_shape(unique.size() == seeds.size(), "experiment: duplicate seeds");
  require_shape(!out_dir.empty(), "experiment: output directory required");
  require_shape(!data_dir.empty() || sbm.has_value(),
                "experiment: need a dataset directory or an SBM spec");
  require_shape(val_frac > 0 && test_frac > 0 && val_frac + test_frac < 1,
                "experiment: bad split fractions");
  require_shape(kmeans_restarts >= 1, "experiment: kmeans_restarts >= 1");
  train.validate();
}

Graph load_dataset_dir(const std::string& dir) {
  const fs::path base(dir);
  const fs::path edges = base / "edges.txt";
  const fs::path features = base / "features.txt";
  if (!fs::exists(edges)) throw IoError("dataset: missing " + edges.string());
  if (!fs::exists(features)) throw IoError("dataset: missing " + features.string());
  const fs::path labels = base / "labels.txt";
  return load_graph(edges.string(), features.string(),
                    fs::exists(labels) ? labels.string() : "");
}

void apply_dataset_profile(TrainConfig& cfg, const std::string& dataset_name,
                           bool epochs_overridden, bool lr_overridden,
                           std::ostream* log) {
  const std::string name = lower(dataset_name);
  if (name.find("pubmed") != std::string::npos) {
    if (!epochs_overridden) cfg.epochs = 1500;
    if (!lr_overridden) {
      cfg.encoder_lr = 5e-3;
      cfg.critic_lr = 5e-3;
    }
    if (log)
      *log << "dataset profile 'pubmed': epochs=" << cfg.epochs
           << " encoder_lr=" << cfg.encoder_lr << " critic_lr=" << cfg.critic_lr << "\n";
  } else if (log) {
    *log << "dataset profile 'default': epochs=" << cfg.epochs
         << " encoder_lr=" << cfg.encoder_lr << " critic_lr=" << cfg.critic_lr << "\n";
  }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);

  const Graph g = cfg.data_dir.empty() ? generate_sbm(*cfg.sbm)
                                       : load_dataset_dir(cfg.data_dir);

  ExperimentResult result;
  std::vector<std::map<std::string, double>> per_seed;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    const std::uint64_t seed = cfg.seeds[i];
    const std::uint64_t split_seed = cfg.split_seed + i;
    Rng split_rng(split_seed);
    const EdgeSplit split = split_edges(g, cfg.val_frac, cfg.test_frac, split_rng);

    TrainConfig tc = cfg.train;
    tc.seed = seed;
    if (log)
      *log << "seed " << seed << " (split " << split_seed << "): training "
           << model_name(tc.model) << " for " << tc.epochs << " epochs\n";
    const TrainReport report = train(g, split, tc);

    std::map<std::string, double> metrics =
        evaluate_embedding(report.embedding, split, g, seed, cfg.kmeans_restarts);

    const fs::path run_dir = fs::path(cfg.out_dir) / ("seed_" + std::to_string(seed));
    fs::create_directories(run_dir);
    json run_cfg = experiment_config_to_json(cfg);
    run_cfg["run"] = {{"seed", seed}, {"split_seed", split_seed}};
    run_cfg["train"] = train_config_to_json(tc);
    write_json_file((run_dir / "config.json").string(), run_cfg);
    save_checkpoint((run_dir / "checkpoint.json").string(), report.params, tc);
    save_embedding((run_dir / "embedding.txt").string(), report.embedding);
    write_text_file((run_dir / "losses.csv").string(), losses_csv(report));
    write_text_file((run_dir / "val.csv").string(), val_csv(report));
    json mj = metrics;
    mj["seed"] = seed;
    mj["split_seed"] = split_seed;
    write_json_file((run_dir / "metrics.json").string(), mj);
    json runinfo{{"version", kVersion},
                 {"wall_seconds", report.wall_seconds},
                 {"generator_steps", report.generator_steps},
                 {"critic_steps", report.critic_steps}};
    write_json_file((run_dir / "runinfo.json").string(), runinfo);

    if (log) {
      *log << "seed " << seed << ": auc=" << metrics["auc"] << " ap=" << metrics["ap"];
      if (metrics.count("acc"))
        *log << " acc=" << metrics["acc"] << " nmi=" << metrics["nmi"]
             << " ari=" << metrics["ari"];
      *log << "\n";
    }
    per_seed.push_back(std::move(metrics));
    result.run_dirs.push_back(run_dir.string());
  }

  result.report = aggregate(per_seed);
  result.aggregate_path = (fs::path(cfg.out_dir) / "aggregate.json").string();
  json agg = metrics_report_to_json(result.report);
  agg["model"] = model_name(cfg.train.model);
  agg["seeds"] = cfg.seeds;
  agg["version"] = kVersion;
  write_json_file(result.aggregate_path, agg);

  const std::string table = format_metrics_table(
      result.report, model_name(cfg.train.model) + " (" +
                         std::to_string(cfg.seeds.size()) + " seeds)");
  result.table_path = (fs::path(cfg.out_dir) / "table.txt").string();
  write_text_file(result.table_path, table);
  if (log) *log << table;
  return result;
}

SweepResult run_sweep(const SweepSpec& spec, std::ostream* log) {
  require_shape(!spec.hidden_widths.empty() && !spec.embed_widths.empty(),
                "sweep: empty width grid");
  for (int w : spec.hidden_widths) require_shape(w >= 1, "sweep: widths >= 1");
  for (int w : spec.embed_widths) require_shape(w >= 1, "sweep: widths >= 1");

  SweepResult result;
  const fs::path out(spec.base.out_dir);
  fs::create_directories(out);
  for (int hidden : spec.hidden_widths) {
    for (int embed : spec.embed_widths) {
      ExperimentConfig cfg = spec.base;
      cfg.train.hidden_dim = hidden;
      cfg.train.embed_dim = embed;
      cfg.out_dir =
          (out / ("h" + std::to_string(hidden) + "_e" + std::to_string(embed))).string();
      if (log) *log << "sweep cell hidden=" << hidden << " embed=" << embed << "\n";
      const ExperimentResult cell = run_experiment(cfg, log);
      result.cells.push_back({hidden, embed, cell.report.mean.at("auc"),
                              cell.report.mean.at("ap"), cell.report.stddev.at("auc"),
                              cell.report.stddev.at("ap")});
    }
  }

  std::ostringstream csv;
  csv << "hidden,embed,mean_auc,std_auc,mean_ap,std_ap\n";
  json jcells = json::array();
  for (const auto& c : result.cells) {
    csv << c.hidden << "," << c.embed << "," << fmt_double(c.mean_auc) << ","
        << fmt_double(c.std_auc) << "," << fmt_double(c.mean_ap) << ","
        << fmt_double(c.std_ap) << "\n";
    jcells.push_back({{"hidden", c.hidden},
                      {"embed", c.embed},
                      {"mean_auc", c.mean_auc},
                      {"std_auc", c.std_auc},
                      {"mean_ap", c.mean_ap},
                      {"std_ap", c.std_ap}});
  }
  result.csv_path = (out / "sweep.csv").string();
  write_text_file(result.csv_path, csv.str());
  result.json_path = (out / "sweep.json").string();
  write_json_file(result.json_path, json{{"version", kVersion}, {"cells", jcells}});
  return result;
}

std::map<std::string, double> run_eval(const EvalRequest& req, std::ostream* log) {
  require_shape(req.checkpoint.empty() != req.embedding.empty(),
                "eval: provide exactly one of checkpoint / embedding");
  const Graph g = load_dataset_dir(req.data_dir);
  Rng split_rng(req.split_seed);
  const EdgeSplit split = split_edges(g, req.val_frac, req.test_frac, split_rng);

  Matrix z;
  if (!req.checkpoint.empty()) {
    TrainConfig cfg;
    const ModelParams params = load_checkpoint(req.checkpoint, &cfg);
    const SpMatrix a_norm = normalize_adjacency(split.train_adjacency).matrix;
    const Matrix x =
        cfg.row_normalize_features ? row_normalize(g.features) : g.features;
    z = encode(a_norm, x, params);
  } else {
    z = load_embedding(req.embedding);
    require_shape(z.rows() == g.n_nodes, "eval: embedding rows != dataset nodes");
  }

  std::map<std::string, double> metrics =
      evaluate_embedding(z, split, g, req.cluster_seed, req.kmeans_restarts);
  if (!req.out_path.empty()) {
    json j = metrics;
    j["split_seed"] = req.split_seed;
    j["version"] = kVersion;
    write_json_file(req.out_path, j);
  }
  if (log) {
    *log << "eval:";
    for (const auto& [k, v] : metrics) *log << " " << k << "=" << v;
    *log << "\n";
  }
  return metrics;
}

Manifest prepare_dataset(const std::string& raw_dir, const std::string& out_dir) {
  const fs::path base(raw_dir);
  if (!fs::exists(base)) throw IoError("prepare: no such directory " + raw_dir);

  // Already-formatted layout: canonicalize and re-emit.
  if (fs::exists(base / "edges.txt") && fs::exists(base / "features.txt")) {
    const Graph g = load_dataset_dir(raw_dir);
    return write_graph_files(g, out_dir);
  }

  // Plain-text citation layout: <name>.content + <name>.cites.
  fs::path content, cites;
  for (const auto& entry : fs::directory_iterator(base)) {
    if (entry.path().extension() == ".content") content = entry.path();
    if (entry.path().extension() == ".cites") cites = entry.path();
  }
  if (content.empty() || cites.empty())
    throw ValidationError("prepare: " + raw_dir +
                          " has neither edges.txt/features.txt nor a "
                          "<name>.content/<name>.cites pair");

  std::map<std::string, int> node_ids;   // paper id -> index, by first appearance
  std::map<std::string, int> class_ids;  // label string -> id, by first appearance
  std::vector<std::vector<std::string>> rows;
  {
    std::ifstream in(content);
    if (!in) throw IoError("cannot open " + content.string());
    std::string line;
    int line_no = 0;
    std::size_t n_cols = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::vector<std::string> tokens;
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      if (tokens.size() < 3)
        throw ParseError(content.string() + ":" + std::to_string(line_no) +
                         ": expected 'id features... label'");
      if (n_cols == 0) n_cols = tokens.size();
      if (tokens.size() != n_cols)
        throw ParseError(content.string() + ":" + std::to_string(line_no) +
                         ": inconsistent column count");
      if (!node_ids.emplace(tokens.front(), static_cast<int>(node_ids.size())).second)
        throw ValidationError(content.string() + ":" + std::to_string(line_no) +
                              ": duplicate node id " + tokens.front());
      class_ids.emplace(tokens.back(), static_cast<int>(class_ids.size()));
      rows.push_back(std::move(tokens));
    }
    if (rows.empty()) throw ValidationError(content.string() + ": empty content file");
  }

  Graph g;
  g.n_nodes = static_cast<int>(rows.size());
  const Index n_feat = static_cast<Index>(rows.front().size()) - 2;
  g.features = Matrix::Zero(g.n_nodes, n_feat);
  g.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Index f = 0; f < n_feat; ++f)
      g.features(static_cast<Index>(i), f) = std::strtod(rows[i][f + 1].c_str(), nullptr);
    g.labels[i] = class_ids.at(rows[i].back());
  }
  g.n_classes = static_cast<int>(class_ids.size());

  long skipped = 0;
  std::set<EdgePair> edges;
  {
    std::ifstream in(cites);
    if (!in) throw IoError("cannot open " + cites.string());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string a, b;
      if (!(ls >> a >> b))
        throw ParseError(cites.string() + ":" + std::to_string(line_no) +
                         ": expected two ids");
      const auto ia = node_ids.find(a);
      const auto ib = node_ids.find(b);
      if (ia == node_ids.end() || ib == node_ids.end()) {
        ++skipped;  // citations to papers absent from the content file
        continue;
      }
      if (ia->second == ib->second) continue;
      edges.emplace(std::min(ia->second, ib->second), std::max(ia->second, ib->second));
    }
  }
  g.adjacency = adjacency_from_edges(g.n_nodes, EdgeList(edges.begin(), edges.end()));

  Manifest m = write_graph_files(g, out_dir);
  m.skipped_edge_endpoints = skipped;
  return m;
}

Manifest write_synth(const SbmSpec& spec, const std::string& out_dir) {
  return write_graph_files(generate_sbm(spec), out_dir);
}

std::string format_metrics_table(const MetricsReport& report, const std::string& title) {
  // Fixed column order, matching the link-prediction / clustering tables.
  static const std::vector<std::string> order = {"auc", "ap", "acc", "nmi", "ari"};
  std::ostringstream os;
  os << title << "\n";
  os << std::left << std::setw(8) << "metric" << std::right << std::setw(10)
     << "mean(%)" << std::setw(10) << "std" << "\n";
  for (const std::string& key : order) {
    if (!report.mean.count(key)) continue;
    os << std::left << std::setw(8) << key << std::right << std::setw(10)
       << std::fixed << std::setprecision(1) << 100.0 * report.mean.at(key)
       << std::setw(10) << std::setprecision(3) << report.stddev.at(key) << "\n";
    os.unsetf(std::ios::fixed);
    os << std::setprecision(6);
  }
  return os.str();
}

}  // namespace warga
