#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace homfrac::accept {

struct Options {
  bool quick = false;  // budgets / 10, statistical tolerances * 2
  std::uint64_t seed = 20240905ULL;
  int threads = 0;
  std::vector<int> only;  // empty = all criteria
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0;
  nlohmann::json details;
};

std::vector<CriterionResult> run_all(const Options& opt);

nlohmann::json to_json(const std::vector<CriterionResult>& results, const Options& opt,
                       double wall_seconds);

}  // namespace homfrac::accept
