// Runs every acceptance check and prints one PASS/FAIL line per criterion.
// Exits nonzero when a check fails, except for checks marked as known
// limitations (these still print FAIL and are listed at the end).

#include <filesystem>
#include <iostream>

#include "fks/verify.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path scratch = argc > 1 ? argv[1] : "acceptance-scratch";
  try {
    const auto results = fks::run_suite(fks::Suite::all, std::cout, scratch);
    long passed = 0, failed = 0, known = 0;
    for (const auto& r : results) {
      if (r.pass)
        ++passed;
      else if (r.known_limitation)
        ++known;
      else
        ++failed;
    }
    std::cout << passed << "/" << results.size() << " passed";
    if (known) std::cout << ", " << known << " known limitation(s) failing as documented";
    std::cout << '\n';
    return failed == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance run aborted: " << e.what() << '\n';
    return 2;
  }
}
