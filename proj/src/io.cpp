#include "warga/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace warga {

using nlohmann::json;

json tensor_to_json(const Matrix& m) {
  json values = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) values.push_back(m(i, j));
  return json{{"shape", {m.rows(), m.cols()}}, {"values", std::move(values)}};
}

Matrix tensor_from_json(const json& j) {
  const auto& shape = j.at("shape");
  const Index rows = shape.at(0).get<Index>();
  const Index cols = shape.at(1).get<Index>();
  const auto& values = j.at("values");
  if (static_cast<Index>(values.size()) != rows * cols)
    throw IoError("tensor: value count does not match shape");
  Matrix m(rows, cols);
  Index idx = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index j2 = 0; j2 < cols; ++j2) m(i, j2) = values.at(idx++).get<double>();
  return m;
}

json train_config_to_json(const TrainConfig& cfg) {
  json j;
  j["model"] = model_name(cfg.model);
  j["epochs"] = cfg.epochs;
  j["critic_iters"] = cfg.critic_iters;
  j["batch_size"] = cfg.batch_size;
  j["hidden_dim"] = cfg.hidden_dim;
  j["embed_dim"] = cfg.embed_dim;
  j["critic_hidden1"] = cfg.critic_hidden1;
  j["critic_hidden2"] = cfg.critic_hidden2;
  j["encoder_lr"] = cfg.encoder_lr;
  j["critic_lr"] = cfg.critic_lr;
  j["clip_bound"] = cfg.clip_bound;
  j["lambda"] = cfg.lambda;
  j["seed"] = cfg.seed;
  j["final_activation"] = cfg.final_activation == Activation::Relu ? "relu" : "linear";
  j["use_pos_weight"] = cfg.use_pos_weight;
  j["include_diagonal"] = cfg.include_diagonal;
  j["row_normalize_features"] = cfg.row_normalize_features;
  j["val_every"] = cfg.val_every;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  if (j.contains("model")) cfg.model = model_from_name(j.at("model").get<std::string>());
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("epochs", cfg.epochs);
  get("critic_iters", cfg.critic_iters);
  get("batch_size", cfg.batch_size);
  get("hidden_dim", cfg.hidden_dim);
  get("embed_dim", cfg.embed_dim);
  get("critic_hidden1", cfg.critic_hidden1);
  get("critic_hidden2", cfg.critic_hidden2);
  get("encoder_lr", cfg.encoder_lr);
  get("critic_lr", cfg.critic_lr);
  get("clip_bound", cfg.clip_bound);
  get("lambda", cfg.lambda);
  get("seed", cfg.seed);
  get("use_pos_weight", cfg.use_pos_weight);
  get("include_diagonal", cfg.include_diagonal);
  get("row_normalize_features", cfg.row_normalize_features);
  get("val_every", cfg.val_every);
  if (j.contains("final_activation")) {
    const std::string act = j.at("final_activation").get<std::string>();
    if (act == "relu") {
      cfg.final_activation = Activation::Relu;
    } else if (act == "linear") {
      cfg.final_activation = Activation::Linear;
    } else {
      throw IoError("config: unknown final_activation '" + act + "'");
    }
  }
  return cfg;
}

json model_params_to_json(const ModelParams& params) {
  json j;
  j["model"] = model_name(params.kind);
  if (params.is_variational()) {
    j["w1"] = tensor_to_json(params.var_encoder.w1);
    j["w2_mu"] = tensor_to_json(params.var_encoder.w2_mu);
    j["w2_logvar"] = tensor_to_json(params.var_encoder.w2_logvar);
  } else {
    j["w1"] = tensor_to_json(params.encoder.w1);
    j["w2"] = tensor_to_json(params.encoder.w2);
    j["final_activation"] =
        params.encoder.final_activation == Activation::Relu ? "relu" : "linear";
  }
  auto mlp_json = [](const MlpParams& p) {
    return json{{"w3", tensor_to_json(p.w3)}, {"b1", tensor_to_json(p.b1)},
                {"w4", tensor_to_json(p.w4)}, {"b2", tensor_to_json(p.b2)},
                {"w5", tensor_to_json(p.w5)}, {"b3", tensor_to_json(p.b3)}};
  };
  if (params.kind == ModelKind::Warga) {
    j["critic"] = mlp_json(params.critic);
    j["critic"]["clip_bound"] = params.critic.clip_bound;
  }
  if (params.kind == ModelKind::Arga || params.kind == ModelKind::Arvga)
    j["discriminator"] = mlp_json(params.discriminator);
  return j;
}

ModelParams model_params_from_json(const json& j) {
  ModelParams params;
  params.kind = model_from_name(j.at("model").get<std::string>());
  if (params.is_variational()) {
    params.var_encoder.w1 = tensor_from_json(j.at("w1"));
    params.var_encoder.w2_mu = tensor_from_json(j.at("w2_mu"));
    params.var_encoder.w2_logvar = tensor_from_json(j.at("w2_logvar"));
  } else {
    params.encoder.w1 = tensor_from_json(j.at("w1"));
    params.encoder.w2 = tensor_from_json(j.at("w2"));
    params.encoder.final_activation =
        j.value("final_activation", "relu") == std::string("linear") ? Activation::Linear
                                                                     : Activation::Relu;
  }
  auto mlp_from = [](const json& m) {
    MlpParams p;
    p.w3 = tensor_from_json(m.at("w3"));
    p.b1 = tensor_from_json(m.at("b1"));
    p.w4 = tensor_from_json(m.at("w4"));
    p.b2 = tensor_from_json(m.at("b2"));
    p.w5 = tensor_from_json(m.at("w5"));
    p.b3 = tensor_from_json(m.at("b3"));
    return p;
  };
  if (j.contains("critic")) {
    static_cast<MlpParams&>(params.critic) = mlp_from(j.at("critic"));
    params.critic.clip_bound = j.at("critic").value("clip_bound", 0.01);
  }
  if (j.contains("discriminator"))
    static_cast<MlpParams&>(params.discriminator) = mlp_from(j.at("discriminator"));
  return params;
}

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const TrainConfig& cfg) {
  json j;
  j["format"] = "warga-checkpoint/1";
  j["config"] = train_config_to_json(cfg);
  j["params"] = model_params_to_json(params);
  write_json_file(path, j);
}

ModelParams load_checkpoint(const std::string& path, TrainConfig* cfg_out) {
  json j = read_json_file(path);
  if (j.value("format", "") != std::string("warga-checkpoint/1"))
    throw IoError(path + ": not a warga checkpoint");
  if (cfg_out) *cfg_out = train_config_from_json(j.at("config"));
  return model_params_from_json(j.at("params"));
}

void save_embedding(const std::string& path, const Matrix& z) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << z.rows() << " " << z.cols() << "\n";
  char buf[32];
  for (Index i = 0; i < z.rows(); ++i) {
    for (Index j = 0; j < z.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", z(i, j));
      out << buf << (j + 1 == z.cols() ? "" : " ");
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed for " + path);
}

Matrix load_embedding(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows <= 0 || cols <= 0)
    throw ParseError(path + ": bad embedding header");
  Matrix z(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (!(in >> z(i, j))) throw ParseError(path + ": truncated embedding data");
  return z;
}

json metrics_report_to_json(const MetricsReport& report) {
  json j;
  j["per_seed"] = json::array();
  for (const auto& run : report.per_seed) j["per_seed"].push_back(run);
  j["mean"] = report.mean;
  j["std"] = report.stddev;
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed for " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return j;
}

}  // namespace warga
