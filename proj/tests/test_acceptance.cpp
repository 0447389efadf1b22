// Acceptance gate runner: one pass/fail line per criterion, nonzero exit
// when any criterion fails.

#include <iostream>

#include "qscat/acceptance.hpp"

int main() {
  auto results = qscat::acceptance::run_all(std::cout);
  int failed = 0;
  for (const auto& r : results)
    if (!r.pass) ++failed;
  if (failed) {
    std::cout << failed << " of " << results.size() << " criteria failed\n";
    return 1;
  }
  std::cout << "all " << results.size() << " criteria passed\n";
  return 0;
}
