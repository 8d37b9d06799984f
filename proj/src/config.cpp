#include "mdf/config.hpp"

#include <fstream>
#include <set>

#include "mdf/errors.hpp"

namespace mdf {

namespace {

void check_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ValidationError("config: " + where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.contains(it.key()))
      throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void read_if(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key)) {
    try {
      out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ValidationError(std::string("config: bad value for '") + key + "'");
    }
  }
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& j) {
  check_keys(j, {"schedule", "loss", "model", "train", "data"}, "top level");
  RunConfig cfg;

  if (j.contains("schedule")) {
    const auto& s = j.at("schedule");
    check_keys(s, {"steps", "beta_start", "beta_end"}, "schedule");
    read_if(s, "steps", cfg.schedule.steps);
    read_if(s, "beta_start", cfg.schedule.beta_start);
    read_if(s, "beta_end", cfg.schedule.beta_end);
  }
  if (j.contains("loss")) {
    const auto& s = j.at("loss");
    check_keys(s, {"weighting", "c", "p2_k", "p2_gamma"}, "loss");
    read_if(s, "weighting", cfg.loss.weighting);
    read_if(s, "c", cfg.loss.c);
    read_if(s, "p2_k", cfg.loss.p2_k);
    read_if(s, "p2_gamma", cfg.loss.p2_gamma);
    if (cfg.loss.weighting != "simple" && cfg.loss.weighting != "p2")
      throw ValidationError("config: loss.weighting must be 'simple' or 'p2'");
    if (cfg.loss.c < 0.0) throw ValidationError("config: loss.c must be >= 0");
  }
  if (j.contains("model")) {
    const auto& s = j.at("model");
    check_keys(s, {"hidden_dims", "embed_dim", "activation"}, "model");
    read_if(s, "hidden_dims", cfg.model.hidden_dims);
    read_if(s, "embed_dim", cfg.model.embed_dim);
    read_if(s, "activation", cfg.model.activation);
    if (cfg.model.activation != "silu" && cfg.model.activation != "tanh")
      throw ValidationError("config: model.activation must be 'silu' or 'tanh'");
  }
  if (j.contains("train")) {
    const auto& s = j.at("train");
    check_keys(s, {"lr", "batch", "steps", "seed"}, "train");
    read_if(s, "lr", cfg.train.lr);
    read_if(s, "batch", cfg.train.batch);
    read_if(s, "steps", cfg.train.steps);
    read_if(s, "seed", cfg.train.seed);
    if (cfg.train.batch < 1) throw ValidationError("config: train.batch must be >= 1");
    if (cfg.train.steps < 0) throw ValidationError("config: train.steps must be >= 0");
  }
  if (j.contains("data")) {
    const auto& s = j.at("data");
    check_keys(s, {"labels", "patch", "stride", "resize", "max_per_slide", "coverage"}, "data");
    read_if(s, "labels", cfg.data.labels);
    read_if(s, "patch", cfg.data.patch);
    read_if(s, "stride", cfg.data.stride);
    read_if(s, "resize", cfg.data.resize);
    read_if(s, "max_per_slide", cfg.data.max_per_slide);
    read_if(s, "coverage", cfg.data.coverage);
    if (cfg.data.labels.empty()) throw ValidationError("config: data.labels must be non-empty");
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError("config parse error in " + path.string() + ": " + ex.what());
  }
  return parse_run_config(j);
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
  return nlohmann::json{
      {"schedule",
       {{"steps", cfg.schedule.steps},
        {"beta_start", cfg.schedule.beta_start},
        {"beta_end", cfg.schedule.beta_end}}},
      {"loss",
       {{"weighting", cfg.loss.weighting},
        {"c", cfg.loss.c},
        {"p2_k", cfg.loss.p2_k},
        {"p2_gamma", cfg.loss.p2_gamma}}},
      {"model",
       {{"hidden_dims", cfg.model.hidden_dims},
        {"embed_dim", cfg.model.embed_dim},
        {"activation", cfg.model.activation}}},
      {"train",
       {{"lr", cfg.train.lr},
        {"batch", cfg.train.batch},
        {"steps", cfg.train.steps},
        {"seed", cfg.train.seed}}},
      {"data",
       {{"labels", cfg.data.labels},
        {"patch", cfg.data.patch},
        {"stride", cfg.data.stride},
        {"resize", cfg.data.resize},
        {"max_per_slide", cfg.data.max_per_slide},
        {"coverage", cfg.data.coverage}}}};
}

}  // namespace mdf
