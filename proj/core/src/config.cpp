#include "restyle/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "restyle/errors.hpp"
#include "restyle/schedule.hpp"

namespace restyle {

std::string RunConfig::classifier_path() const {
  return classifier_ckpt.empty() ? data_dir + "/classifier.ckpt"
                                 : classifier_ckpt;
}

void RunConfig::validate() const {
  if (config_version != 1)
    throw ConfigError("config: unsupported config_version " +
                      std::to_string(config_version));
  if (n_train < 1 || n_valid < 1 || n_test < 1)
    throw ConfigError("config: split sizes must be positive");
  if (min_freq < 1) throw ConfigError("config: min_freq must be >= 1");
  if (max_len < 3) throw ConfigError("config: max_len must be >= 3");
  if (emb < 1 || hidden < 1 || max_decode_len < 1)
    throw ConfigError("config: model dimensions must be positive");
  if (clf_emb < 1 || clf_filters < 1 || clf_epochs < 1)
    throw ConfigError("config: classifier settings must be positive");
  if (batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (lr <= 0.0) throw ConfigError("config: lr must be positive");
  if (alpha < 0.0 || beta < 0.0 || gamma < 0.0)
    throw ConfigError("config: loss weights must be non-negative");
  schedule_phases(schedule);  // throws on unknown name
  if (data_dir.empty()) throw ConfigError("config: data_dir is empty");
  if (out_dir.empty()) throw ConfigError("config: out_dir is empty");
}

std::string RunConfig::to_json() const {
  nlohmann::ordered_json j{
      {"config_version", config_version},
      {"seed", seed},
      {"data",
       {{"dir", data_dir},
        {"n_train", n_train},
        {"n_valid", n_valid},
        {"n_test", n_test},
        {"min_freq", min_freq},
        {"max_len", max_len}}},
      {"model",
       {{"emb", emb}, {"hidden", hidden}, {"max_decode_len", max_decode_len}}},
      {"classifier",
       {{"emb", clf_emb}, {"filters", clf_filters}, {"epochs", clf_epochs}}},
      {"training",
       {{"schedule", schedule},
        {"lr", lr},
        {"clip", clip},
        {"batch_size", batch_size},
        {"alpha", alpha},
        {"beta", beta},
        {"gamma", gamma},
        {"direction", to_string(direction)}}},
      {"out_dir", out_dir},
  };
  if (!classifier_ckpt.empty()) j["classifier_ckpt"] = classifier_ckpt;
  if (!model_ckpt.empty()) j["model_ckpt"] = model_ckpt;
  return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json(const std::string& json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  RunConfig cfg;
  try {
    cfg.config_version = j.value("config_version", 1);
    cfg.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("data")) {
      const auto& d = j["data"];
      cfg.data_dir = d.value("dir", cfg.data_dir);
      cfg.n_train = d.value("n_train", cfg.n_train);
      cfg.n_valid = d.value("n_valid", cfg.n_valid);
      cfg.n_test = d.value("n_test", cfg.n_test);
      cfg.min_freq = d.value("min_freq", cfg.min_freq);
      cfg.max_len = d.value("max_len", cfg.max_len);
    }
    if (j.contains("model")) {
      const auto& m = j["model"];
      cfg.emb = m.value("emb", cfg.emb);
      cfg.hidden = m.value("hidden", cfg.hidden);
      cfg.max_decode_len = m.value("max_decode_len", cfg.max_decode_len);
    }
    if (j.contains("classifier")) {
      const auto& c = j["classifier"];
      cfg.clf_emb = c.value("emb", cfg.clf_emb);
      cfg.clf_filters = c.value("filters", cfg.clf_filters);
      cfg.clf_epochs = c.value("epochs", cfg.clf_epochs);
    }
    if (j.contains("training")) {
      const auto& t = j["training"];
      cfg.schedule = t.value("schedule", cfg.schedule);
      cfg.lr = t.value("lr", cfg.lr);
      cfg.clip = t.value("clip", cfg.clip);
      cfg.batch_size = t.value("batch_size", cfg.batch_size);
      cfg.alpha = t.value("alpha", cfg.alpha);
      cfg.beta = t.value("beta", cfg.beta);
      cfg.gamma = t.value("gamma", cfg.gamma);
      if (t.contains("direction"))
        cfg.direction = direction_from_string(t["direction"]);
    }
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.classifier_ckpt = j.value("classifier_ckpt", cfg.classifier_ckpt);
    cfg.model_ckpt = j.value("model_ckpt", cfg.model_ckpt);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: bad field type: ") + e.what());
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("config: cannot open " + path);
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return from_json(buffer.str());
}

void RunConfig::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("config: cannot write " + path);
  os << to_json();
}

}  // namespace restyle
