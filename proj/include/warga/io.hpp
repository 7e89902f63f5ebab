#pragma once

#include <string>

#include <json.hpp>

#include "warga/evaluation.hpp"
#include "warga/training.hpp"
#include "warga/types.hpp"

namespace warga {

// Tensors serialize as {"shape": [rows, cols], "values": [... row-major ...]}.
// Doubles round-trip exactly through the JSON layer.
nlohmann::json tensor_to_json(const Matrix& m);
Matrix tensor_from_json(const nlohmann::json& j);

nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

nlohmann::json model_params_to_json(const ModelParams& params);
ModelParams model_params_from_json(const nlohmann::json& j);

// Checkpoint document: {"format": "warga-checkpoint/1", "config": ..., "params": ...}.
void save_checkpoint(const std::string& path, const ModelParams& params,
                     const TrainConfig& cfg);
ModelParams load_checkpoint(const std::string& path, TrainConfig* cfg_out = nullptr);

// Text embedding: header "N e", then N rows of e floats at full precision.
void save_embedding(const std::string& path, const Matrix& z);
Matrix load_embedding(const std::string& path);

nlohmann::json metrics_report_to_json(const MetricsReport& report);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace warga
