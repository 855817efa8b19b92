#include "dcc/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace dcc::io {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& where, const std::string& what) {
  throw Error(Errc::ParseError, where.empty() ? what : where + ": " + what);
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool is_total(const std::string& s) {
  std::string l;
  for (char c : s) l += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return l == "total";
}

std::int64_t parse_count(const std::string& cell, const std::string& where) {
  std::int64_t v = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || cell.empty()) parse_fail(where, "'" + cell + "' is not an integer count");
  if (v < 0) parse_fail(where, "negative count");
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_fail(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- JSON helpers --------------------------------------------------------

const json& member(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(where, std::string("missing field '") + key + "'");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) parse_fail(where, "expected a number");
  return v.get<double>();
}

std::vector<std::string> strings(const json& v, const std::string& where) {
  if (!v.is_array()) parse_fail(where, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) parse_fail(where + "[" + std::to_string(i) + "]", "expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

Vec<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) parse_fail(where, "expected an array of numbers");
  Vec<double> out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Index>(i)] = number(v[i], where + "[" + std::to_string(i) + "]");
  return out;
}

Vec<double> normalized_counts(const json& v, const std::string& where) {
  if (!v.is_array()) parse_fail(where, "expected an array of counts");
  Vec<double> out(static_cast<Index>(v.size()));
  double total = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    if (!v[i].is_number_integer() || v[i].get<std::int64_t>() < 0) parse_fail(w, "expected a non-negative integer");
    out[static_cast<Index>(i)] = static_cast<double>(v[i].get<std::int64_t>());
    total += out[static_cast<Index>(i)];
  }
  if (total <= 0) parse_fail(where, "counts sum to zero");
  return out / total;
}

Mat<double> matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) parse_fail(where, "expected a non-empty array of rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  Mat<double> out(static_cast<Index>(v.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    const Vec<double> row = numbers(v[i], w);
    if (static_cast<std::size_t>(row.size()) != cols) parse_fail(w, "ragged matrix");
    out.row(static_cast<Index>(i)) = row.transpose();
  }
  return out;
}

CountMatrix count_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) parse_fail(where, "expected a non-empty array of rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  CountMatrix out(static_cast<Index>(v.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    if (!v[i].is_array() || v[i].size() != cols) parse_fail(w, "ragged matrix");
    for (std::size_t k = 0; k < cols; ++k) {
      const auto& c = v[i][k];
      if (!c.is_number_integer() || c.get<std::int64_t>() < 0)
        parse_fail(w + "[" + std::to_string(k) + "]", "expected a non-negative integer");
      out(static_cast<Index>(i), static_cast<Index>(k)) = c.get<std::int64_t>();
    }
  }
  return out;
}

template <typename F>
auto guarded(const std::string& where, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == Errc::ParseError) throw;
    parse_fail(where, e.what());
  }
}

Joint joint_from_probs(const json& v, const std::string& where) {
  const Mat<double> t = matrix(v, where);
  return guarded(where, [&] { return Joint(t); });
}

Joint joint_from_counts(const json& v, const std::string& where) {
  const CountMatrix c = count_matrix(v, where);
  return guarded(where, [&] { return Joint::from_counts(c); });
}

json matrix_json(const Mat<double>& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(row);
  }
  return out;
}

json counts_json(const CountMatrix& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(row);
  }
  return out;
}

json joint_json(const Joint& j) {
  return j.counts() ? counts_json(*j.counts()) : matrix_json(j.table());
}

}  // namespace

CountTable parse_count_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    rows.push_back(split_csv_line(t));
  }
  if (rows.empty()) parse_fail("csv", "no rows");
  if (rows.size() < 2) parse_fail("csv", "header row but no data rows");

  const auto& header = rows.front();
  std::vector<std::string> col_labels(header.begin() + 1, header.end());
  bool total_col = !col_labels.empty() && is_total(col_labels.back());
  if (total_col) col_labels.pop_back();
  if (col_labels.empty()) parse_fail("csv header", "no column labels");

  std::vector<std::string> row_labels;
  std::vector<std::vector<std::int64_t>> cells;
  std::vector<std::int64_t> total_row;
  std::vector<std::int64_t> row_totals;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "csv line " + std::to_string(r + 1);
    const std::size_t expect = col_labels.size() + (total_col ? 1 : 0) + 1;
    if (row.size() != expect)
      parse_fail(where, "expected " + std::to_string(expect) + " cells, found " + std::to_string(row.size()));
    std::vector<std::int64_t> vals;
    for (std::size_t k = 1; k < row.size(); ++k) vals.push_back(parse_count(row[k], where));
    if (is_total(row[0])) {
      if (r + 1 != rows.size()) parse_fail(where, "Total row must be last");
      total_row = vals;
      continue;
    }
    if (total_col) {
      row_totals.push_back(vals.back());
      vals.pop_back();
    }
    row_labels.push_back(row[0]);
    cells.push_back(std::move(vals));
  }
  if (cells.empty()) parse_fail("csv", "no data rows");

  CountMatrix m(static_cast<Index>(cells.size()), static_cast<Index>(col_labels.size()));
  for (std::size_t r = 0; r < cells.size(); ++r)
    for (std::size_t k = 0; k < col_labels.size(); ++k) m(static_cast<Index>(r), static_cast<Index>(k)) = cells[r][k];

  for (std::size_t r = 0; r < row_totals.size(); ++r)
    if (m.row(static_cast<Index>(r)).sum() != row_totals[r])
      parse_fail("csv", "Total column for '" + row_labels[r] + "' is " + std::to_string(row_totals[r]) +
                            " but cells sum to " + std::to_string(m.row(static_cast<Index>(r)).sum()));
  if (!total_row.empty()) {
    for (std::size_t k = 0; k < col_labels.size(); ++k)
      if (m.col(static_cast<Index>(k)).sum() != total_row[k])
        parse_fail("csv", "Total row for '" + col_labels[k] + "' is " + std::to_string(total_row[k]) +
                              " but cells sum to " + std::to_string(m.col(static_cast<Index>(k)).sum()));
    if (total_col && total_row.back() != m.sum())
      parse_fail("csv", "grand total " + std::to_string(total_row.back()) + " does not match cell sum " +
                            std::to_string(m.sum()));
  }

  CountTable out;
  out.had_totals = total_col || !total_row.empty();
  const std::string corner = trim(header.front());
  out.transposed = corner == "x\\w" || corner == "x/w";
  if (out.transposed) {
    out.w_labels = col_labels;
    out.x_labels = row_labels;
    out.counts = m.transpose();
  } else {
    out.w_labels = row_labels;
    out.x_labels = col_labels;
    out.counts = m;
  }
  return out;
}

CountTable read_count_csv(const std::filesystem::path& path) {
  try {
    return parse_count_csv(read_file(path));
  } catch (const Error& e) {
    parse_fail(path.string(), e.what());
  }
}

ScenarioFile scenario_from_json(const json& doc, const std::filesystem::path& base_dir, bool validate) {
  if (!doc.is_object()) parse_fail("", "scenario document must be a JSON object");
  const json& ver = member(doc, "schema_version", "");
  if (!ver.is_number_integer() || ver.get<int>() != kSchemaVersion)
    parse_fail("schema_version", "unsupported schema version (expected " + std::to_string(kSchemaVersion) + ")");

  struct {
    std::string name;
    std::vector<std::string> notes;
    std::optional<std::string> target_x;
  } file;
  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) parse_fail("name", "expected a string");
    file.name = it->get<std::string>();
  }
  if (auto it = doc.find("notes"); it != doc.end()) {
    if (it->is_string()) file.notes.push_back(it->get<std::string>());
    else file.notes = strings(*it, "notes");
  }
  if (auto it = doc.find("target_x"); it != doc.end()) {
    if (!it->is_string()) parse_fail("target_x", "expected a string");
    file.target_x = it->get<std::string>();
  }

  const json& wx = member(doc, "wx", "");
  if (!wx.is_object() || wx.size() != 1)
    parse_fail("wx", "expected an object with exactly one of joint, joint_counts, joint_counts_csv, marginals, "
                     "candidates, subgroup_shares");

  std::optional<CountTable> csv;
  if (auto it = wx.find("joint_counts_csv"); it != wx.end()) {
    if (!it->is_string()) parse_fail("wx.joint_counts_csv", "expected a path string");
    std::filesystem::path p = it->get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    csv = read_count_csv(p);
  }

  std::vector<std::string> w_labels, x_labels;
  if (doc.contains("w_labels")) w_labels = strings(doc["w_labels"], "w_labels");
  else if (csv) w_labels = csv->w_labels;
  else parse_fail("", "missing field 'w_labels'");
  if (doc.contains("x_labels")) x_labels = strings(doc["x_labels"], "x_labels");
  else if (csv) x_labels = csv->x_labels;
  else parse_fail("", "missing field 'x_labels'");
  if (csv && (csv->w_labels != w_labels || csv->x_labels != x_labels))
    parse_fail("wx.joint_counts_csv", "CSV labels do not match w_labels/x_labels");

  const Vec<double> ys = numbers(member(doc, "y_support", ""), "y_support");

  const json& ygw = member(doc, "y_given_w", "");
  Mat<double> table;
  if (ygw.is_object()) {
    const CountMatrix c = count_matrix(member(ygw, "counts", "y_given_w"), "y_given_w.counts");
    table.resize(c.rows(), c.cols());
    for (Index r = 0; r < c.rows(); ++r) {
      const double tot = static_cast<double>(c.row(r).sum());
      if (tot <= 0) parse_fail("y_given_w.counts[" + std::to_string(r) + "]", "counts sum to zero");
      table.row(r) = c.row(r).cast<double>() / tot;
    }
  } else if (ygw.is_array()) {
    std::vector<Vec<double>> rows;
    for (std::size_t i = 0; i < ygw.size(); ++i) {
      const std::string w = "y_given_w[" + std::to_string(i) + "]";
      if (ygw[i].is_object()) rows.push_back(normalized_counts(member(ygw[i], "counts", w), w + ".counts"));
      else rows.push_back(numbers(ygw[i], w));
      if (rows.back().size() != ys.size()) parse_fail(w, "length does not match y_support");
    }
    table.resize(static_cast<Index>(rows.size()), ys.size());
    for (std::size_t i = 0; i < rows.size(); ++i) table.row(static_cast<Index>(i)) = rows[i].transpose();
  } else {
    parse_fail("y_given_w", "expected an array of rows or {\"counts\": matrix}");
  }

  std::optional<Vec<double>> shares;
  WXKnowledge<double> knowledge = [&]() -> WXKnowledge<double> {
    if (wx.contains("subgroup_shares")) {
      shares = numbers(wx["subgroup_shares"], "wx.subgroup_shares");
      if (w_labels.size() != 1) parse_fail("wx.subgroup_shares", "needs exactly one w label");
      if (shares->size() != static_cast<Index>(x_labels.size()))
        parse_fail("wx.subgroup_shares", "length does not match x_labels");
      if ((shares->array() <= 0).any() || (shares->array() > 1).any())
        parse_fail("wx.subgroup_shares", "shares must lie in (0, 1]");
      if (std::abs(shares->sum() - 1) > 0.05) parse_fail("wx.subgroup_shares", "shares are far from summing to 1");
      const Mat<double> m = (*shares / shares->sum()).transpose();
      return guarded("wx.subgroup_shares", [&] { return Joint(m); });
    }
    if (csv) return guarded("wx.joint_counts_csv", [&] { return Joint::from_counts(csv->counts); });
    if (wx.contains("joint")) return joint_from_probs(wx["joint"], "wx.joint");
    if (wx.contains("joint_counts")) return joint_from_counts(wx["joint_counts"], "wx.joint_counts");
    if (wx.contains("marginals")) {
      const json& m = wx["marginals"];
      if (!m.is_object()) parse_fail("wx.marginals", "expected {\"pw\": [...], \"px\": [...]}");
      return MarginalsOnly<double>{numbers(member(m, "pw", "wx.marginals"), "wx.marginals.pw"),
                                   numbers(member(m, "px", "wx.marginals"), "wx.marginals.px")};
    }
    if (wx.contains("candidates")) {
      const json& c = wx["candidates"];
      if (!c.is_array()) parse_fail("wx.candidates", "expected an array of matrices");
      CandidateSet<double> set;
      for (std::size_t i = 0; i < c.size(); ++i)
        set.members.push_back(joint_from_probs(c[i], "wx.candidates[" + std::to_string(i) + "]"));
      return set;
    }
    parse_fail("wx", "unknown knowledge kind '" + wx.begin().key() + "'");
  }();

  std::map<std::string, double> bv;
  if (auto it = doc.find("bv"); it != doc.end()) {
    if (!it->is_object()) parse_fail("bv", "expected an object of label -> delta");
    for (const auto& [label, v] : it->items()) {
      if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity"))
        bv[label] = std::numeric_limits<double>::infinity();
      else
        bv[label] = number(v, "bv." + label);
    }
  }

  auto make_labels = [](std::vector<std::string> l, const char* where) {
    return guarded(where, [&] { return LabelSet(std::move(l)); });
  };
  ScenarioD s{make_labels(std::move(w_labels), "w_labels"), make_labels(std::move(x_labels), "x_labels"), ys,
              table, std::move(knowledge), std::move(bv)};
  if (validate) require_valid(s);
  if (file.target_x && !s.x_labels.find(*file.target_x))
    parse_fail("target_x", "'" + *file.target_x + "' is not an x label");
  return ScenarioFile{std::move(file.name), std::move(file.notes), std::move(file.target_x), std::move(s),
                      std::move(shares)};
}

ScenarioFile load_scenario(const std::filesystem::path& path, bool validate) {
  const std::string text = read_file(path);
  if (trim(text).empty()) parse_fail(path.string(), "empty file");
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    parse_fail(path.string(), e.what());
  }
  try {
    return scenario_from_json(doc, path.parent_path(), validate);
  } catch (const Error& e) {
    if (e.code() == Errc::ValidationFailed) throw;
    parse_fail(path.string(), e.what());
  }
}

json scenario_to_json(const ScenarioFile& file) {
  const auto& s = file.scenario;
  json doc;
  doc["schema_version"] = kSchemaVersion;
  if (!file.name.empty()) doc["name"] = file.name;
  if (!file.notes.empty()) doc["notes"] = file.notes;
  if (file.target_x) doc["target_x"] = *file.target_x;
  doc["w_labels"] = s.w_labels.labels();
  doc["x_labels"] = s.x_labels.labels();
  doc["y_support"] = std::vector<double>(s.y_support.data(), s.y_support.data() + s.y_support.size());
  doc["y_given_w"] = matrix_json(s.y_given_w);
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Joint>) {
          doc["wx"][k.counts() ? "joint_counts" : "joint"] = joint_json(k);
        } else if constexpr (std::is_same_v<T, MarginalsOnly<double>>) {
          doc["wx"]["marginals"] = {{"pw", std::vector<double>(k.pw.data(), k.pw.data() + k.pw.size())},
                                    {"px", std::vector<double>(k.px.data(), k.px.data() + k.px.size())}};
        } else {
          json c = json::array();
          for (const auto& m : k.members) c.push_back(matrix_json(m.table()));
          doc["wx"]["candidates"] = c;
        }
      },
      s.wx);
  if (file.subgroup_shares)
    doc["wx"] = {{"subgroup_shares",
                  std::vector<double>(file.subgroup_shares->data(),
                                      file.subgroup_shares->data() + file.subgroup_shares->size())}};
  if (!s.bv_deltas.empty()) {
    json bv = json::object();
    for (const auto& [k, d] : s.bv_deltas) bv[k] = std::isfinite(d) ? json(d) : json("inf");
    doc["bv"] = bv;
  }
  return doc;
}

}  // namespace dcc::io
