#pragma once

#include <string>
#include <vector>

namespace povmround {

/// One certified numeric bound: a measured value compared to a threshold.
struct Check {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool upper = true;  // measured <= threshold when true, >= otherwise
  bool passed = false;

  static Check at_most(std::string name, double measured, double threshold);
  static Check at_least(std::string name, double measured, double threshold);
};

bool all_passed(const std::vector<Check>& checks);

/// Name of the first failing check, or empty.
std::string first_failure(const std::vector<Check>& checks);

}  // namespace povmround
