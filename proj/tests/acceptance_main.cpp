#include <cstdlib>
#include <iostream>
#include <string>

#include "brownmeasure/acceptance.hpp"

// Usage: acceptance [criterion ids...]
int main(int argc, char** argv) {
  brown::AcceptanceOptions options;
  for (int k = 1; k < argc; ++k) options.only.push_back(std::stoi(argv[k]));
  const auto results = brown::run_acceptance(options, &std::cout);
  int failed = 0;
  for (const auto& r : results) failed += !r.pass;
  std::cout << results.size() - static_cast<std::size_t>(failed) << "/" << results.size() << " criteria passed\n";
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
