#pragma once

#include <string>

namespace restyle {

// Transfer direction between the two style levels of a parallel corpus.
enum class Direction { LowToHigh, HighToLow };

std::string to_string(Direction d);
Direction direction_from_string(const std::string& s);

}  // namespace restyle
