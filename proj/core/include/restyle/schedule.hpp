#pragma once

#include <string>
#include <vector>

namespace restyle {

// Which loss terms are active in a training phase.
struct LossMask {
  bool ml = false;
  bool cp = false;
  bool ts = false;

  bool operator==(const LossMask&) const = default;
};

struct Phase {
  LossMask mask;
  int epochs = 0;

  bool operator==(const Phase&) const = default;
};

// The six ablation schedules. Every schedule starts with a 10-epoch
// cross-entropy phase; each later phase runs 5 epochs and resumes from the
// best-validation checkpoint of the phase before it.
//
//   CopyNMT  ml(10)
//   TS       ml(10), ml+ts(5)
//   CP       ml(10), ml+cp(5)
//   TS+CP    ml(10), ml+cp+ts(5)
//   TS->CP   ml(10), ml+ts(5), ml+cp(5)
//   CP->TS   ml(10), ml+cp(5), ml+ts(5)
//
// Throws ConfigError for an unknown name.
std::vector<Phase> schedule_phases(const std::string& name);

const std::vector<std::string>& schedule_names();

}  // namespace restyle
