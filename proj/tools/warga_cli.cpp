// Command-line runner: dataset preparation, training, sweeps, and evaluation.
//
//   warga prepare --raw DIR --out DIR
//   warga synth   --blocks 50,50 --p-in 0.2 --p-out 0.01 --out DIR
//   warga train   --data DIR --model warga --seeds 0..9 --out DIR [flags]
//   warga sweep   --data DIR --hidden 32,64,128 --embed 16,32,64,128 --out DIR
//   warga eval    --checkpoint F --data DIR --split-seed 0
//
// Flat JSON config files are accepted via --config; explicit flags win.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "warga/experiment.hpp"
#include "warga/io.hpp"
#include "warga/version.hpp"

namespace {

using namespace warga;

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const std::uint64_t lo = std::stoull(text.substr(0, dots));
    const std::uint64_t hi = std::stoull(text.substr(dots + 2));
    if (hi < lo) throw ValidationError("--seeds: range end before start");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::string token;
  std::istringstream ss(text);
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) seeds.push_back(std::stoull(token));
  }
  if (seeds.empty()) throw ValidationError("--seeds: no seeds given");
  return seeds;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::string token;
  std::istringstream ss(text);
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) out.push_back(std::stoi(token));
  }
  return out;
}

// Flag-bound experiment options shared by train and sweep.
struct TrainCli {
  std::string data_dir;
  std::string model = "warga";
  std::string seeds = "0";
  std::string out_dir = "runs";
  std::string config_path;
  std::string activation = "relu";
  std::uint64_t split_seed = 0;
  double val_frac = 0.05, test_frac = 0.10;
  int kmeans_restarts = 10;
  TrainConfig tc;

  CLI::Option* opt_epochs = nullptr;
  CLI::Option* opt_enc_lr = nullptr;
  CLI::Option* opt_critic_lr = nullptr;

  void bind(CLI::App* cmd) {
    cmd->add_option("--data", data_dir, "Dataset directory (edges.txt, features.txt, ...)");
    cmd->add_option("--config", config_path, "Flat JSON config; explicit flags override");
    cmd->add_option("--model", model, "warga | gae | vgae | arga | arvga")
        ->default_val(model);
    cmd->add_option("--seeds", seeds, "Seed list '0,1,2' or range '0..9'")
        ->default_val(seeds);
    cmd->add_option("--split-seed", split_seed, "Base seed for edge splits (run i uses +i)")
        ->default_val(split_seed);
    cmd->add_option("--out", out_dir, "Output directory")->default_val(out_dir);
    opt_epochs = cmd->add_option("--epochs", tc.epochs, "Training epochs T")
                     ->default_val(tc.epochs);
    cmd->add_option("--critic-iters", tc.critic_iters, "Critic iterations K per epoch")
        ->default_val(tc.critic_iters);
    cmd->add_option("--batch-size", tc.batch_size, "Sample batch m; 0 = full batch")
        ->default_val(tc.batch_size);
    cmd->add_option("--hidden", tc.hidden_dim, "First encoder layer width d")
        ->default_val(tc.hidden_dim);
    cmd->add_option("--embed", tc.embed_dim, "Embedding width e")
        ->default_val(tc.embed_dim);
    cmd->add_option("--critic-hidden1", tc.critic_hidden1, "Critic first hidden width k")
        ->default_val(tc.critic_hidden1);
    cmd->add_option("--critic-hidden2", tc.critic_hidden2, "Critic second hidden width l")
        ->default_val(tc.critic_hidden2);
    opt_enc_lr = cmd->add_option("--lr", tc.encoder_lr, "Encoder learning rate")
                     ->default_val(tc.encoder_lr);
    opt_critic_lr =
        cmd->add_option("--critic-lr", tc.critic_lr, "Critic/discriminator learning rate")
            ->default_val(tc.critic_lr);
    cmd->add_option("--clip", tc.clip_bound, "Critic weight clip bound")
        ->default_val(tc.clip_bound);
    cmd->add_option("--lambda", tc.lambda, "Regularizer weight; 0 reduces to GAE")
        ->default_val(tc.lambda);
    cmd->add_option("--activation", activation, "Final encoder activation: relu | linear")
        ->default_val(activation);
    cmd->add_flag("!--no-pos-weight", tc.use_pos_weight,
                  "Disable positive-class reweighting in the reconstruction loss");
    cmd->add_flag("!--no-diagonal", tc.include_diagonal,
                  "Exclude the diagonal from the reconstruction target");
    cmd->add_flag("--row-normalize", tc.row_normalize_features,
                  "Row-normalize input features");
    cmd->add_option("--val-every", tc.val_every, "Validation cadence in epochs")
        ->default_val(tc.val_every);
    cmd->add_option("--val-frac", val_frac, "Fraction of edges held out for validation")
        ->default_val(val_frac);
    cmd->add_option("--test-frac", test_frac, "Fraction of edges held out for testing")
        ->default_val(test_frac);
    cmd->add_option("--kmeans-restarts", kmeans_restarts, "K-means restarts for clustering")
        ->default_val(kmeans_restarts);
  }

  ExperimentConfig to_experiment() const {
    ExperimentConfig cfg;
    if (!config_path.empty()) {
      const nlohmann::json j = read_json_file(config_path);
      cfg.train = train_config_from_json(j);
      if (j.contains("data_dir")) cfg.data_dir = j.at("data_dir").get<std::string>();
      if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
      if (j.contains("split_seed")) cfg.split_seed = j.at("split_seed").get<std::uint64_t>();
      if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
      if (j.contains("val_frac")) cfg.val_frac = j.at("val_frac").get<double>();
      if (j.contains("test_frac")) cfg.test_frac = j.at("test_frac").get<double>();
      if (j.contains("kmeans_restarts"))
        cfg.kmeans_restarts = j.at("kmeans_restarts").get<int>();
    }
    return cfg;
  }

  // Copies flag-bound values over the config-file baseline. CLI11 only
  // rewrites bound variables when a flag is actually seen, so `tc` already
  // holds config-file values merged with explicit overrides.
  void finalize(CLI::App* cmd, ExperimentConfig& cfg) const {
    cfg.train = tc;
    cfg.train.model = model_from_name(model);
    cfg.train.final_activation =
        activation == "linear" ? Activation::Linear : Activation::Relu;
    if (cmd->count("--data")) cfg.data_dir = data_dir;
    if (cmd->count("--seeds") || cfg.seeds.empty()) cfg.seeds = parse_seeds(seeds);
    if (cmd->count("--split-seed")) cfg.split_seed = split_seed;
    if (cmd->count("--out") || cfg.out_dir.empty()) cfg.out_dir = out_dir;
    if (cmd->count("--val-frac")) cfg.val_frac = val_frac;
    if (cmd->count("--test-frac")) cfg.test_frac = test_frac;
    if (cmd->count("--kmeans-restarts")) cfg.kmeans_restarts = kmeans_restarts;

    if (!cfg.data_dir.empty()) {
      const std::string name =
          std::filesystem::path(cfg.data_dir).filename().string();
      apply_dataset_profile(cfg.train, name, opt_epochs->count() > 0,
                            opt_enc_lr->count() > 0 || opt_critic_lr->count() > 0,
                            &std::cout);
    }
  }
};

// Loads config-file train settings into the bound variables before parsing,
// so unset flags keep config values and set flags override them.
void preload_config(TrainCli& cli, int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      cli.config_path = argv[i + 1];
      const nlohmann::json j = read_json_file(cli.config_path);
      cli.tc = train_config_from_json(j);
      if (j.contains("model")) cli.model = j.at("model").get<std::string>();
      if (j.contains("final_activation"))
        cli.activation = j.at("final_activation").get<std::string>();
      return;
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kVersion) +
               " - Wasserstein adversarially regularized graph autoencoder"};
  app.require_subcommand(1);

  // prepare
  auto* prepare = app.add_subcommand("prepare", "Convert a raw dataset directory");
  std::string raw_dir, prep_out;
  prepare->add_option("--raw", raw_dir, "Raw dataset directory")->required();
  prepare->add_option("--out", prep_out, "Output directory")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a stochastic-block-model dataset");
  std::string blocks_str = "50,50", feature_mode = "identity", synth_out;
  SbmSpec sbm;
  synth->add_option("--blocks", blocks_str, "Block sizes, e.g. 50,50")
      ->default_val(blocks_str);
  synth->add_option("--p-in", sbm.p_in, "Within-block edge probability")
      ->default_val(sbm.p_in);
  synth->add_option("--p-out", sbm.p_out, "Cross-block edge probability")
      ->default_val(sbm.p_out);
  synth->add_option("--features", feature_mode, "identity | onehot")
      ->default_val(feature_mode);
  synth->add_option("--seed", sbm.seed, "Graph seed")->default_val(sbm.seed);
  synth->add_option("--out", synth_out, "Output directory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train one model over a seed list");
  TrainCli train_cli;
  preload_config(train_cli, argc, argv);
  train_cli.bind(train_cmd);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Width grid of training runs");
  TrainCli sweep_cli;
  preload_config(sweep_cli, argc, argv);
  sweep_cli.bind(sweep_cmd);
  std::string hidden_str = "32,64,128", embed_str = "16,32,64,128";
  sweep_cmd->add_option("--hidden-grid", hidden_str, "First-layer widths")
      ->default_val(hidden_str);
  sweep_cmd->add_option("--embed-grid", embed_str, "Embedding widths")
      ->default_val(embed_str);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Recompute metrics from a saved run");
  EvalRequest eval_req;
  eval_cmd->add_option("--checkpoint", eval_req.checkpoint, "Checkpoint JSON path");
  eval_cmd->add_option("--embedding", eval_req.embedding, "Embedding text path");
  eval_cmd->add_option("--data", eval_req.data_dir, "Dataset directory")->required();
  eval_cmd->add_option("--split-seed", eval_req.split_seed, "Split seed to reproduce")
      ->default_val(eval_req.split_seed);
  eval_cmd->add_option("--cluster-seed", eval_req.cluster_seed, "K-means seed")
      ->default_val(eval_req.cluster_seed);
  eval_cmd->add_option("--kmeans-restarts", eval_req.kmeans_restarts, "K-means restarts")
      ->default_val(eval_req.kmeans_restarts);
  eval_cmd->add_option("--val-frac", eval_req.val_frac, "Validation fraction")
      ->default_val(eval_req.val_frac);
  eval_cmd->add_option("--test-frac", eval_req.test_frac, "Test fraction")
      ->default_val(eval_req.test_frac);
  eval_cmd->add_option("--out", eval_req.out_path, "Write metrics JSON here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prepare) {
      const Manifest m = prepare_dataset(raw_dir, prep_out);
      std::cout << "prepared: nodes=" << m.nodes << " edges=" << m.undirected_edges
                << " features=" << m.features << " classes=" << m.classes;
      if (m.skipped_edge_endpoints)
        std::cout << " (skipped " << m.skipped_edge_endpoints
                  << " citations to unknown ids)";
      std::cout << "\n";
    } else if (*synth) {
      for (int b : parse_int_list(blocks_str)) sbm.block_sizes.push_back(b);
      sbm.feature_mode = feature_mode == "onehot" ? SbmSpec::Features::BlockIndicator
                                                  : SbmSpec::Features::Identity;
      const Manifest m = write_synth(sbm, synth_out);
      std::cout << "synth: nodes=" << m.nodes << " edges=" << m.undirected_edges << "\n";
    } else if (*train_cmd) {
      ExperimentConfig cfg = train_cli.to_experiment();
      train_cli.finalize(train_cmd, cfg);
      run_experiment(cfg, &std::cout);
    } else if (*sweep_cmd) {
      SweepSpec spec;
      spec.base = sweep_cli.to_experiment();
      sweep_cli.finalize(sweep_cmd, spec.base);
      spec.hidden_widths = parse_int_list(hidden_str);
      spec.embed_widths = parse_int_list(embed_str);
      run_sweep(spec, &std::cout);
    } else if (*eval_cmd) {
      run_eval(eval_req, &std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
