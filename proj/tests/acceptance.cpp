// One PASS/FAIL line per acceptance criterion. A criterion also fails when
// it overruns its time limit. Exit status is 0 when every failure is in the
// known-unattainable list below, 1 otherwise.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "amolab/cli.hpp"
#include "amolab/verify.hpp"

namespace fs = std::filesystem;

namespace {

// Liouville beta = 1.0: the fourth level needs ~e^{q_3} digits (see README).
const std::set<int> kKnownUnattainable{2};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void line(int id, bool pass, const std::string& name, const std::string& summary, double seconds, double limit) {
  char t[64];
  if (limit > 0) std::snprintf(t, sizeof t, "%.1f s / %.0f s", seconds, limit);
  else std::snprintf(t, sizeof t, "%.1f s", seconds);
  std::cout << "criterion " << id << (id < 10 ? "  " : " ") << (pass ? "PASS" : "FAIL") << "  " << name << ": "
            << summary << " [" << t << "]" << std::endl;
}

}  // namespace

int main() {
  amolab::verify::Options opts;
  opts.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::set<int> failed;

  auto verdict = amolab::verify::run_suite(opts);
  for (const auto& r : verdict.results) {
    bool in_time = r.limit_seconds <= 0 || r.seconds < r.limit_seconds;
    bool pass = r.pass && in_time;
    std::string summary = r.summary;
    if (r.pass && !in_time) summary += " (over the time limit)";
    line(r.id, pass, r.name, summary, r.seconds, r.limit_seconds);
    if (!pass) failed.insert(r.id);
  }

  // determinism: two quick verify runs through the command line
  {
    auto t0 = std::chrono::steady_clock::now();
    auto root = fs::temp_directory_path() / "amolab-acceptance";
    fs::remove_all(root);
    std::string verdicts[2];
    int codes[2];
    for (int i = 0; i < 2; ++i) {
      auto dir = root / ("run" + std::to_string(i));
      std::string out = dir.string();
      const char* argv[] = {"amolab", "verify", "--scale", "quick", "--seed", "20240601", "--out", out.c_str()};
      std::ostringstream sink;
      codes[i] = amolab::cli::run(8, argv, sink, sink);
      verdicts[i] = slurp(dir / "verdict.json");
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool same = !verdicts[0].empty() && verdicts[0] == verdicts[1] && codes[0] == codes[1];
    line(12, same, "determinism",
         same ? "two verify runs, byte-identical verdicts (" + std::to_string(verdicts[0].size()) + " bytes)"
              : "verdicts differ",
         secs, 0);
    if (!same) failed.insert(12);
  }

  bool only_known = std::includes(kKnownUnattainable.begin(), kKnownUnattainable.end(), failed.begin(), failed.end());
  std::cout << failed.size() << " of 12 criteria failed";
  if (!failed.empty()) std::cout << (only_known ? " (all documented as unattainable)" : " (unexpected failures)");
  std::cout << std::endl;
  return only_known ? 0 : 1;
}
