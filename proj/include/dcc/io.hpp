#pragma once

// Scenario files (JSON) and count tables (CSV).

#include "dcc/core.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dcc::io {

inline constexpr int kSchemaVersion = 1;

/// Integer cross-classification read from CSV. Rows are w labels, columns x
/// labels, whatever the orientation on disk.
struct CountTable {
  std::vector<std::string> w_labels;
  std::vector<std::string> x_labels;
  CountMatrix counts;
  bool had_totals = false;
  bool transposed = false;
};

/// CSV layout: a header row whose first cell is a corner marker followed by
/// column labels, then one row per label with integer cells. The corner
/// "w\x" (or anything else) means rows are w labels; "x\w" means rows are x
/// labels and the table is transposed on read. A trailing "Total" column
/// and/or row is checked against the cell sums and dropped. Blank lines and
/// lines starting with '#' are ignored.
CountTable parse_count_csv(const std::string& text);
CountTable read_count_csv(const std::filesystem::path& path);

struct ScenarioFile {
  std::string name;
  std::vector<std::string> notes;
  std::optional<std::string> target_x;
  ScenarioD scenario;
  /// Set when the file gives published per-subgroup shares of a single w
  /// category instead of a joint. Rounded estimates need not sum to exactly
  /// one, so bounds use each share on its own; `scenario` carries the
  /// normalized joint for commands that need one.
  std::optional<Vec<double>> subgroup_shares{};
};

/// Parses a scenario document. Relative CSV references resolve against
/// base_dir. Throws Error(ParseError) with a field path on malformed input,
/// and Error(ValidationFailed) when validate is set and the scenario fails
/// validate_scenario.
ScenarioFile scenario_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                                bool validate = true);

ScenarioFile load_scenario(const std::filesystem::path& path, bool validate = true);

nlohmann::json scenario_to_json(const ScenarioFile& file);

}  // namespace dcc::io
