// Acceptance suite runner: one PASS/FAIL line per criterion, nonzero exit on
// any failure. `--quick` scales budgets down for smoke runs.

#include <cstring>
#include <iostream>
#include <string>

#include "accept/acceptance.hpp"

int main(int argc, char** argv) {
  homfrac::accept::Options opt;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--quick") {
      opt.quick = true;
    } else if (arg == "--seed" && i + 1 < argc) {
      opt.seed = std::stoull(argv[++i]);
    } else if (arg == "--threads" && i + 1 < argc) {
      opt.threads = std::stoi(argv[++i]);
    } else if (arg == "--only" && i + 1 < argc) {
      std::string list = argv[++i];
      std::size_t pos = 0;
      while (pos < list.size()) {
        std::size_t comma = list.find(',', pos);
        if (comma == std::string::npos) comma = list.size();
        opt.only.push_back(std::stoi(list.substr(pos, comma - pos)));
        pos = comma + 1;
      }
    }
  }

  auto results = homfrac::accept::run_all(opt);
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  criterion " << r.id << ": " << r.name << "  ("
              << r.seconds << " s)\n";
    if (!r.pass) {
      std::cout << "      details: " << r.details.dump() << "\n";
      all = false;
    }
  }
  std::cout << (all ? "all criteria passed" : "some criteria FAILED") << "\n";
  return all ? 0 : 1;
}
