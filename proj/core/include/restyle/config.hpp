#pragma once

#include <cstdint>
#include <string>

#include "restyle/types.hpp"

namespace restyle {

// Complete description of a run. Serialized as versioned JSON; a run is a
// pure function of (config, seed, input files), so the echo written into the
// run directory is sufficient to reproduce it.
struct RunConfig {
  int config_version = 1;
  std::uint64_t seed = 1;

  // data
  std::string data_dir = "data";
  int n_train = 2000;
  int n_valid = 200;
  int n_test = 200;
  int min_freq = 1;
  int max_len = 20;

  // seq2seq model
  int emb = 32;
  int hidden = 64;
  int max_decode_len = 20;

  // style classifier
  int clf_emb = 32;
  int clf_filters = 16;
  int clf_epochs = 8;

  // training
  std::string schedule = "TS->CP";
  double lr = 1e-3;
  double clip = 5.0;
  int batch_size = 16;
  double alpha = 1.0;
  double beta = 0.125;
  double gamma = 1.0;
  Direction direction = Direction::LowToHigh;

  // artifacts
  std::string out_dir = "runs/default";
  std::string classifier_ckpt;  // path; defaults to <data_dir>/classifier.ckpt
  std::string model_ckpt;       // resolved checkpoint for eval/transfer

  std::string classifier_path() const;

  // Throws ConfigError on invalid values.
  void validate() const;

  std::string to_json() const;
  static RunConfig from_json(const std::string& json);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace restyle
