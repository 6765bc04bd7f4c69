#pragma once

// Experiment registry and command-line runner.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ndlab::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

struct Criterion {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::string note;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
};

struct ExperimentInfo {
  std::string id;
  std::string module;
  std::string description;
  std::string anchor;
};

struct RunReport {
  std::string id;
  std::string anchor;
  Json config;
  std::vector<Criterion> criteria;
  Table table;
  std::optional<double> elapsed_ms;

  bool pass() const;
  std::vector<std::string> failing() const;
  Json to_json() const;
};

const std::vector<ExperimentInfo>& experiments();

/// config = {"experiment": id, "params": {...}, "outputs": {...}}.
/// InputError on unknown ids or parameters.
RunReport run_experiment(const Json& config);

/// Exit codes: 0 all criteria pass, 1 some criterion fails, 2 usage or
/// input error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string format_double(double x);

}  // namespace ndlab::cli
