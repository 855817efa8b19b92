#include "dcc/report.hpp"

#include <cstdio>
#include <sstream>

namespace dcc::report {

using nlohmann::json;

namespace {

Method method_from(const std::string& s) {
  for (Method m : {Method::ClosedForm, Method::LinearProgram, Method::GridUnion, Method::Oracle, Method::Dominance})
    if (s == to_string(m)) return m;
  throw Error(Errc::ParseError, "unknown method '" + s + "'");
}

json interval_json(const Interval& b) {
  return {{"lo", b.lo}, {"hi", b.hi}, {"sharp", b.sharp}, {"method", to_string(b.method)}};
}

Interval interval_from(const json& j) {
  return {j.at("lo").get<double>(), j.at("hi").get<double>(), j.at("sharp").get<bool>(),
          method_from(j.at("method").get<std::string>())};
}

}  // namespace

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

json to_json(const Report& r) {
  json targets = json::array();
  for (const auto& t : r.targets) {
    json cells = json::array();
    for (const auto& c : t.cells) {
      cells.push_back({{"w", c.w_label},
                       {"q", c.q},
                       {"p", c.p},
                       {"lower_informative", c.lower_informative},
                       {"upper_informative", c.upper_informative},
                       {"width", c.width ? json(*c.width) : json("vacuous")}});
    }
    json e = {{"quantity", t.quantity}, {"target", t.target}, {"interval", interval_json(t.interval)}};
    if (!t.feasible.empty()) e["feasible"] = t.feasible;
    if (!t.cells.empty()) e["cells"] = cells;
    targets.push_back(e);
  }
  return {{"scenario", r.scenario},
          {"command", r.command},
          {"knowledge", r.knowledge},
          {"w_labels", r.w_labels},
          {"x_labels", r.x_labels},
          {"y_support", r.y_support},
          {"targets", targets},
          {"warnings", r.warnings}};
}

Report from_json(const json& doc) {
  try {
    Report r;
    r.scenario = doc.at("scenario").get<std::string>();
    r.command = doc.at("command").get<std::string>();
    r.knowledge = doc.at("knowledge").get<std::string>();
    r.w_labels = doc.at("w_labels").get<std::vector<std::string>>();
    r.x_labels = doc.at("x_labels").get<std::vector<std::string>>();
    r.y_support = doc.at("y_support").get<std::vector<double>>();
    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
    for (const auto& e : doc.at("targets")) {
      TargetResult t;
      t.quantity = e.at("quantity").get<std::string>();
      t.target = e.at("target").get<std::string>();
      t.interval = interval_from(e.at("interval"));
      if (e.contains("feasible")) t.feasible = e["feasible"].get<std::vector<double>>();
      if (e.contains("cells"))
        for (const auto& c : e["cells"]) {
          CellNote n;
          n.w_label = c.at("w").get<std::string>();
          n.q = c.at("q").get<double>();
          n.p = c.at("p").get<double>();
          n.lower_informative = c.at("lower_informative").get<bool>();
          n.upper_informative = c.at("upper_informative").get<bool>();
          if (c.at("width").is_number()) n.width = c["width"].get<double>();
          t.cells.push_back(std::move(n));
        }
      r.targets.push_back(std::move(t));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("report: ") + e.what());
  }
}

std::string render_report(const Report& r, Format format) {
  if (format == Format::Json) return to_json(r).dump(2) + "\n";

  std::ostringstream os;
  os << "scenario:  " << r.scenario << "\n";
  os << "command:   " << r.command << "\n";
  os << "knowledge: " << r.knowledge << "\n";

  std::size_t width = 0;
  for (const auto& t : r.targets) width = std::max(width, t.quantity.size());
  for (const auto& t : r.targets) {
    os << t.quantity << std::string(width - t.quantity.size(), ' ') << " ∈ [" << format_fixed(t.interval.lo)
       << ", " << format_fixed(t.interval.hi) << "]  " << to_string(t.interval.method)
       << (t.interval.sharp ? ", sharp" : "") << "\n";
    if (!t.feasible.empty()) {
      os << "    feasible values:";
      for (double v : t.feasible) os << " " << format_fixed(v);
      os << "\n";
    }
    for (const auto& c : t.cells) {
      os << "    w=" << c.w_label << "  q=" << format_fixed(c.q) << "  p=" << format_fixed(c.p)
         << "  lower " << (c.lower_informative ? "informative" : "uninformative") << ", upper "
         << (c.upper_informative ? "informative" : "uninformative") << ", width "
         << (c.width ? format_fixed(*c.width) : std::string("vacuous")) << "\n";
    }
  }
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";
  return os.str();
}

}  // namespace dcc::report
