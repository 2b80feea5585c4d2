#include "restyle/schedule.hpp"

#include "restyle/errors.hpp"

namespace restyle {

namespace {

constexpr int kBasePhaseEpochs = 10;
constexpr int kTunePhaseEpochs = 5;

const LossMask kMl{true, false, false};
const LossMask kMlCp{true, true, false};
const LossMask kMlTs{true, false, true};
const LossMask kMlCpTs{true, true, true};

}  // namespace

std::vector<Phase> schedule_phases(const std::string& name) {
  if (name == "CopyNMT") return {{kMl, kBasePhaseEpochs}};
  if (name == "TS")
    return {{kMl, kBasePhaseEpochs}, {kMlTs, kTunePhaseEpochs}};
  if (name == "CP")
    return {{kMl, kBasePhaseEpochs}, {kMlCp, kTunePhaseEpochs}};
  if (name == "TS+CP")
    return {{kMl, kBasePhaseEpochs}, {kMlCpTs, kTunePhaseEpochs}};
  if (name == "TS->CP")
    return {{kMl, kBasePhaseEpochs},
            {kMlTs, kTunePhaseEpochs},
            {kMlCp, kTunePhaseEpochs}};
  if (name == "CP->TS")
    return {{kMl, kBasePhaseEpochs},
            {kMlCp, kTunePhaseEpochs},
            {kMlTs, kTunePhaseEpochs}};
  throw ConfigError("unknown schedule '" + name +
                    "' (expected one of CopyNMT, TS, CP, TS+CP, TS->CP, "
                    "CP->TS)");
}

const std::vector<std::string>& schedule_names() {
  static const std::vector<std::string> names = {"CopyNMT", "TS",     "CP",
                                                 "TS+CP",   "TS->CP", "CP->TS"};
  return names;
}

}  // namespace restyle
