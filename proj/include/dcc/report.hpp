#pragma once

#include "dcc/core.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace dcc::report {

/// Informativeness of one (w, target) cell of an event bound.
struct CellNote {
  std::string w_label;
  double q = 0;  ///< P(y in B | w)
  double p = 0;  ///< P(x != target | w)
  bool lower_informative = false;
  bool upper_informative = false;
  std::optional<double> width;  ///< nullopt: vacuous
};

struct TargetResult {
  std::string quantity;  ///< e.g. "P(y=1|x=Hispanic)"
  std::string target;
  Interval interval;
  std::vector<double> feasible;  ///< quantile targets only
  std::vector<CellNote> cells;
};

struct Report {
  std::string scenario;
  std::string command;
  std::string knowledge;
  std::vector<std::string> w_labels;
  std::vector<std::string> x_labels;
  std::vector<double> y_support;
  std::vector<TargetResult> targets;
  std::vector<std::string> warnings;
};

enum class Format { Text, Json };

nlohmann::json to_json(const Report& r);
Report from_json(const nlohmann::json& doc);

/// Text: one line per target with endpoints at 4 decimals. Json: sorted
/// keys, shortest round-trip doubles, two-space indent.
std::string render_report(const Report& r, Format format);

std::string format_fixed(double v, int decimals = 4);

}  // namespace dcc::report
