// One line per acceptance criterion; exit status 1 if any fails. Optional
// arguments pick criteria by number.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "suites.hpp"

using namespace disconj::suites;

int main(int argc, char** argv) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const std::vector<std::pair<std::string, std::function<SuiteResult()>>> items{
      {"conjugate-point golden formulas", conjugate_point_goldens},
      {"harmonic calibration", harmonic_calibration},
      {"Lyapunov boundary and sharpness", lyapunov_boundary_and_sharpness},
      {"N/O dichotomy pair", dichotomy_pair},
      {"soundness sweep", [] { return soundness_sweep(); }},
      {"Green's function suite", green_suite},
      {"factorization and Rolle", factorization_and_rolle},
      {"periodic suite", periodic_suite},
      {"property suites", property_suites},
  };
  std::vector<std::size_t> pick;
  for (int k = 1; k < argc; ++k) {
    const long n = std::strtol(argv[k], nullptr, 10);
    if (n >= 1 && n <= static_cast<long>(items.size())) pick.push_back(static_cast<std::size_t>(n - 1));
  }
  if (pick.empty())
    for (std::size_t i = 0; i < items.size(); ++i) pick.push_back(i);
  int failed = 0;
  for (const std::size_t i : pick) {
    const auto t0 = Clock::now();
    SuiteResult r;
    try {
      r = items[i].second();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (i + 1 == items.size() && pick.size() == items.size()) {
      const double total = std::chrono::duration<double>(Clock::now() - start).count();
      r.detail += "; total runtime " + std::to_string(static_cast<int>(total)) + " s";
      if (total > 300) {
        r.pass = false;
        r.detail += " exceeds 300 s";
      }
    }
    std::printf("criterion %zu: %s  %s: %s (%.1f s)\n", i + 1, r.pass ? "PASS" : "FAIL", items[i].first.c_str(),
                r.detail.c_str(), secs);
    for (const auto& f : r.failed) std::printf("    %s\n", f.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(pick.size()) - failed, pick.size());
  return failed == 0 ? 0 : 1;
}
