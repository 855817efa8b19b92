#include "dcc/cli.hpp"

#include "dcc/closed_form.hpp"
#include "dcc/dominance.hpp"
#include "dcc/io.hpp"
#include "dcc/oracle.hpp"
#include "dcc/report.hpp"
#include "dcc/sharp_bounds.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <set>

#ifndef DCC_FIXTURE_DIR_DEFAULT
#define DCC_FIXTURE_DIR_DEFAULT "fixtures"
#endif

namespace dcc::cli {

namespace {

using report::CellNote;
using report::Report;
using report::TargetResult;

struct Options {
  std::string scenario;
  std::string fixture;
  std::string counts;
  std::vector<std::string> targets;
  bool all_targets = false;
  std::string format = "text";
  std::vector<std::string> bv;
  std::string assume;
  long grid_n = 101;
  bool assume_nested = false;
  std::string method;  // empty: lp, or closed-form for subgroup shares
  std::string event;
  double alpha = 0.5;
  double step = 1e-3;
  std::optional<double> tol;
  double budget = 1e7;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int exit_for(Errc e) {
  switch (e) {
    case Errc::ValidationFailed:
    case Errc::ParseError:
    case Errc::InvalidCounts:
    case Errc::DegenerateMargin:
    case Errc::InvalidJoint:
    case Errc::InvalidLabels:
    case Errc::InvalidDistribution:
      return kValidationFailure;
    case Errc::InvalidArgument:
      return kUsageError;
    default:
      return kComputationError;
  }
}

report::Format parse_format(const std::string& f) {
  if (f == "text") return report::Format::Text;
  if (f == "json") return report::Format::Json;
  throw UsageError("--format must be text or json");
}

io::ScenarioFile load(const Options& o, bool validate) {
  if (!o.scenario.empty() && !o.fixture.empty()) throw UsageError("pass only one of --scenario and --fixture");
  if (!o.fixture.empty()) return io::load_scenario(fixture_dir() / (o.fixture + ".json"), validate);
  if (!o.scenario.empty()) return io::load_scenario(o.scenario, validate);
  throw UsageError("one of --scenario or --fixture is required");
}

std::string scenario_name(const Options& o, const io::ScenarioFile& f) {
  if (!f.name.empty()) return f.name;
  if (!o.fixture.empty()) return o.fixture;
  return std::filesystem::path(o.scenario).stem().string();
}

std::string knowledge_kind(const ScenarioD& s) {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Joint>) return "joint";
        else if constexpr (std::is_same_v<T, MarginalsOnly<double>>) return "marginals-only";
        else return "candidates (" + std::to_string(k.members.size()) + ")";
      },
      s.wx);
}

void apply_assume(ScenarioD& s, const std::string& assume) {
  if (assume.empty()) return;
  if (assume == "marginals-only") {
    if (auto* j = std::get_if<Joint>(&s.wx)) s.wx = MarginalsOnly<double>{j->pw(), j->px()};
    else if (!std::holds_alternative<MarginalsOnly<double>>(s.wx))
      throw UsageError("--assume marginals-only needs a scenario with a joint or marginals");
  } else if (assume == "candidates") {
    if (auto* j = std::get_if<Joint>(&s.wx)) s.wx = CandidateSet<double>{{*j}};
    else if (!std::holds_alternative<CandidateSet<double>>(s.wx))
      throw UsageError("--assume candidates needs a scenario with a joint or candidates");
  } else {
    throw UsageError("--assume must be marginals-only or candidates");
  }
}

void apply_bv_flags(ScenarioD& s, const std::vector<std::string>& flags) {
  for (const auto& f : flags) {
    const auto eq = f.rfind('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == f.size())
      throw UsageError("--bv expects label=delta, got '" + f + "'");
    const std::string label = f.substr(0, eq), value = f.substr(eq + 1);
    double d;
    if (value == "inf" || value == "infinity") {
      d = std::numeric_limits<double>::infinity();
    } else {
      try {
        std::size_t used = 0;
        d = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw UsageError("--bv delta '" + value + "' is not a number");
      }
    }
    s.bv_deltas[label] = d;
  }
}

/// Replaces the outcome by the indicator of the event set.
std::string collapse_event(ScenarioD& s, const std::string& spec) {
  std::vector<double> values;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("--event value '" + item + "' is not a number");
    }
  }
  if (values.empty()) throw UsageError("--event needs at least one outcome value");
  Vec<double> indicator = Vec<double>::Zero(s.y_support.size());
  for (double v : values) {
    bool found = false;
    for (Index i = 0; i < s.y_support.size(); ++i)
      if (s.y_support[i] == v) indicator[i] = 1, found = true;
    if (!found) throw UsageError("--event value " + item + " is not in y_support");
  }
  Mat<double> ygw(s.y_given_w.rows(), 2);
  ygw.col(1) = s.y_given_w * indicator;
  ygw.col(0) = Vec<double>::Ones(ygw.rows()) - ygw.col(1);
  s.y_given_w = ygw;
  s.y_support = (Vec<double>(2) << 0.0, 1.0).finished();
  std::ostringstream label;
  label << "y∈{";
  for (std::size_t i = 0; i < values.size(); ++i) label << (i ? "," : "") << values[i];
  label << "}";
  return label.str();
}

std::vector<Index> resolve_targets(const Options& o, const io::ScenarioFile& f) {
  const auto& xs = f.scenario.x_labels;
  std::vector<Index> out;
  if (o.all_targets) {
    for (Index i = 0; i < xs.size(); ++i) out.push_back(i);
    return out;
  }
  std::vector<std::string> names = o.targets;
  if (names.empty() && f.target_x) names.push_back(*f.target_x);
  if (names.empty()) throw UsageError("no target: pass --target LABEL or --all-targets");
  for (const auto& n : names) {
    auto i = xs.find(n);
    if (!i) throw UsageError("unknown target x label '" + n + "'");
    out.push_back(*i);
  }
  return out;
}

Report header(const Options& o, const io::ScenarioFile& f, const ScenarioD& s, const std::string& command) {
  Report r;
  r.scenario = scenario_name(o, f);
  r.command = command;
  r.knowledge = f.subgroup_shares ? "subgroup shares" : knowledge_kind(s);
  r.w_labels = s.w_labels.labels();
  r.x_labels = s.x_labels.labels();
  r.y_support.assign(s.y_support.data(), s.y_support.data() + s.y_support.size());
  return r;
}

std::vector<CellNote> cell_notes(const ScenarioD& s, Index target) {
  std::vector<CellNote> out;
  const auto& j = s.joint();
  const Mat<double> xw = condition_x_given_w(j);
  const Vec<double> q = s.event_given_w();
  for (Index w = 0; w < j.rows(); ++w) {
    if (j(w, target) <= 0) continue;
    const double p = 1.0 - xw(w, target);
    const auto info = classify_informativeness(q[w], p);
    out.push_back({s.w_labels[w], q[w], p, info.lower_informative, info.upper_informative, info.width});
  }
  return out;
}

Interval full_event_bound(const ScenarioD& s, Index t, const Options& o, const BvSpec<double>& bv,
                          std::vector<std::string>& warnings) {
  if (o.assume_nested) {
    const auto w = s.w_labels.find(s.x_labels[t]);
    if (w) {
      const double nest = condition_w_given_x(s.joint())(*w, t);
      if (nest < 1.0 - kProbTol)
        warnings.push_back("nesting asserted for '" + s.x_labels[t] + "' although the joint gives P(w=" +
                           s.x_labels[t] + "|x=" + s.x_labels[t] + ") = " + report::format_fixed(nest));
    }
    if (!bv.empty()) throw UsageError("--assume-nested cannot be combined with bounded variation");
    return nested_event_bound(s, t);
  }
  if (o.method == "closed-form") {
    if (!bv.empty()) throw UsageError("--method closed-form does not support bounded variation; use lp");
    return event_bound_closed_form(s, t);
  }
  if (!o.method.empty() && o.method != "lp") throw UsageError("--method must be lp or closed-form");
  return bv.empty() ? sharp_event_bounds(s, t) : with_bounded_variation(s, bv, t);
}

int cmd_event(const Options& o, std::ostream& out) {
  auto f = load(o, true);
  ScenarioD s = f.scenario;
  apply_bv_flags(s, o.bv);
  apply_assume(s, o.assume);
  require_valid(s);
  std::string outcome = "y=1";
  if (!o.event.empty()) outcome = collapse_event(s, o.event);
  else if (!s.binary_outcome())
    throw UsageError("outcome support is not {0, 1}; pass --event v1,v2,... to bound P(y in B | x)");

  const auto targets = resolve_targets(o, f);
  Report r = header(o, f, s, "bounds event");
  BvSpec<double> bv{s.bv_deltas};
  if (!bv.empty()) r.warnings.push_back("bounded-variation caps are enforced as weak inequalities (<= delta)");

  const bool by_share = f.subgroup_shares && o.assume.empty();
  if (by_share) {
    if (o.method == "lp") throw UsageError("subgroup shares are not a joint distribution; use --method closed-form");
    if (!bv.empty() || o.assume_nested) throw UsageError("subgroup shares support plain closed-form bounds only");
    if (std::abs(f.subgroup_shares->sum() - 1) > kProbTol)
      r.warnings.push_back("subgroup shares sum to " + report::format_fixed(f.subgroup_shares->sum()) +
                           "; each subgroup is bounded from its own share");
  }

  PartialOptions<double> popt;
  popt.grid_n = o.grid_n;
  for (Index t : targets) {
    TargetResult tr;
    tr.target = s.x_labels[t];
    tr.quantity = "P(" + outcome + "|x=" + tr.target + ")";
    if (by_share) {
      const double q = s.event_given_w()[0], share = (*f.subgroup_shares)[t];
      tr.interval = subgroup_bounds(q, Vec<double>(Vec<double>::Constant(1, share))).front();
      const auto info = classify_informativeness(q, 1 - share);
      tr.cells.push_back({s.w_labels[0], q, 1 - share, info.lower_informative, info.upper_informative, info.width});
    } else if (s.has_full_joint()) {
      tr.interval = full_event_bound(s, t, o, bv, r.warnings);
      tr.cells = cell_notes(s, t);
    } else if (const auto* m = std::get_if<MarginalsOnly<double>>(&s.wx)) {
      const auto rep = partial_knowledge_bounds(s, t, popt, bv);
      tr.interval = rep.interval;
      const auto [lo, hi] = frechet_range(m->pw[1], m->px[1]);
      r.warnings.push_back(tr.quantity + ": P(w=" + s.w_labels[1] + ", x=" + s.x_labels[1] + ") swept over " +
                           std::to_string(rep.grid_points) + " points of [" + report::format_fixed(lo, 6) + ", " +
                           report::format_fixed(hi, 6) + "] (" + std::to_string(o.grid_n) +
                           " subintervals plus slope breakpoints)");
      if (!rep.excluded.empty())
        r.warnings.push_back(tr.quantity + ": " + std::to_string(rep.excluded.size()) + " sweep points infeasible");
    } else {
      const auto rep = candidate_set_bounds(s, t, bv);
      tr.interval = rep.interval;
      for (Index k : rep.excluded)
        r.warnings.push_back(tr.quantity + ": candidate " + std::to_string(k) + " excluded (no solution)");
      if (rep.gap) r.warnings.push_back(tr.quantity + ": candidate intervals do not overlap; hull includes a gap");
    }
    r.targets.push_back(std::move(tr));
  }
  out << report::render_report(r, parse_format(o.format));
  return kOk;
}

int cmd_mean_quantile(const Options& o, std::ostream& out, bool quantile) {
  auto f = load(o, true);
  ScenarioD s = f.scenario;
  apply_assume(s, o.assume);
  if (!o.bv.empty() || !s.bv_deltas.empty())
    throw UsageError("bounded variation applies to event bounds only");
  if (quantile && !(o.alpha > 0 && o.alpha < 1)) throw UsageError("--alpha must lie in (0, 1)");
  const auto targets = resolve_targets(o, f);
  Report r = header(o, f, s, quantile ? "bounds quantile" : "bounds mean");
  PartialOptions<double> popt;
  popt.grid_n = o.grid_n;
  const auto joints = knowledge_joints(s, popt);
  if (joints.size() > 1)
    r.warnings.push_back("hull over " + std::to_string(joints.size()) + " joints consistent with the knowledge");

  for (Index t : targets) {
    TargetResult tr;
    tr.target = s.x_labels[t];
    tr.quantity = quantile ? "Q" + report::format_fixed(o.alpha, 2) + "(y|x=" + tr.target + ")"
                           : "E(y|x=" + tr.target + ")";
    std::optional<Interval> acc;
    std::set<double> feasible;
    for (const auto& j : joints) {
      const auto sj = detail::with_joint(s, j);
      Interval b;
      if (quantile) {
        const auto qb = mixture_quantile_bounds(sj, t, o.alpha);
        b = qb.interval;
        feasible.insert(qb.feasible.begin(), qb.feasible.end());
      } else {
        b = mixture_mean_bounds(sj, t);
      }
      acc = acc ? hull(*acc, b) : b;
    }
    if (joints.size() > 1) {
      acc->method = Method::GridUnion;
      acc->sharp = false;
    }
    tr.interval = *acc;
    if (quantile)
      for (double v : feasible)
        if (v >= acc->lo && v <= acc->hi) tr.feasible.push_back(v);
    r.targets.push_back(std::move(tr));
  }
  out << report::render_report(r, parse_format(o.format));
  return kOk;
}

int cmd_oracle(const Options& o, std::ostream& out) {
  auto f = load(o, true);
  ScenarioD s = f.scenario;
  apply_bv_flags(s, o.bv);
  require_valid(s);
  std::string outcome = "y=1";
  if (!o.event.empty()) outcome = collapse_event(s, o.event);
  if (!s.has_full_joint()) throw UsageError("oracle check needs a fully known joint");
  const auto targets = resolve_targets(o, f);
  Report r = header(o, f, s, "oracle check");
  BvSpec<double> bv{s.bv_deltas};
  OracleConfig cfg;
  cfg.step = o.step;
  cfg.constraint_tol = o.tol;
  cfg.budget = o.budget;
  bool all_agree = true;
  for (Index t : targets) {
    const auto lp = bv.empty() ? sharp_event_bounds(s, t) : with_bounded_variation(s, bv, t);
    const auto grid = grid_enumerate_bounds(s, t, cfg, bv);
    const double slack = oracle_slack(s, t, cfg);
    const bool agree = lp.contains(grid, slack) && grid.contains(lp, cfg.step + 1e-12);
    all_agree = all_agree && agree;
    const std::string q = "P(" + outcome + "|x=" + s.x_labels[t] + ")";
    r.targets.push_back({q + " lp", s.x_labels[t], lp, {}, {}});
    r.targets.push_back({q + " oracle", s.x_labels[t], grid, {}, {}});
    r.warnings.push_back(q + ": " + (agree ? "agree" : "DISAGREE") + " within slack " +
                         report::format_fixed(slack, 6) + " (step " + report::format_fixed(cfg.step, 6) + ")");
  }
  out << report::render_report(r, parse_format(o.format));
  return all_agree ? kOk : kComputationError;
}

int cmd_validate(const Options& o, std::ostream& out) {
  const auto format = parse_format(o.format);
  if (!o.counts.empty()) {
    const auto table = io::read_count_csv(o.counts);
    const auto joint = Joint::from_counts(table.counts);
    const LabelSet wl(table.w_labels), xl(table.x_labels);
    const std::int64_t total = table.counts.sum();
    const double disc = discordant_mass(joint, wl, xl);
    if (format == report::Format::Json) {
      nlohmann::json j = {{"valid", true},
                          {"total", total},
                          {"w_labels", table.w_labels},
                          {"x_labels", table.x_labels},
                          {"discordant_fraction", disc}};
      for (Index w = 0; w < wl.size(); ++w) j["pw"][wl[w]] = table.counts.row(w).sum();
      for (Index x = 0; x < xl.size(); ++x) j["px"][xl[x]] = table.counts.col(x).sum();
      out << j.dump(2) << "\n";
      return kOk;
    }
    out << "counts: " << table.counts.rows() << "x" << table.counts.cols() << ", total " << total
        << (table.had_totals ? " (Total row/column verified)" : "") << "\n";
    for (Index w = 0; w < wl.size(); ++w)
      out << "P(w=" << wl[w] << ") = " << table.counts.row(w).sum() << "/" << total << " = "
          << report::format_fixed(joint.pw()[w]) << "\n";
    for (Index x = 0; x < xl.size(); ++x)
      out << "P(x=" << xl[x] << ") = " << table.counts.col(x).sum() << "/" << total << " = "
          << report::format_fixed(joint.px()[x]) << "\n";
    out << "discordant fraction = " << report::format_fixed(disc) << "\n";
    return kOk;
  }

  const auto f = load(o, false);
  const auto violations = validate_scenario(f.scenario);
  if (format == report::Format::Json) {
    out << nlohmann::json{{"valid", violations.empty()}, {"violations", violations}}.dump(2) << "\n";
  } else if (violations.empty()) {
    out << "ok: " << scenario_name(o, f) << " (" << f.scenario.w_labels.size() << " w labels, "
        << f.scenario.x_labels.size() << " x labels, knowledge " << knowledge_kind(f.scenario) << ")\n";
  } else {
    out << "invalid: " << scenario_name(o, f) << "\n";
    for (const auto& v : violations) out << "  - " << v << "\n";
  }
  return violations.empty() ? kOk : kValidationFailure;
}

int cmd_fixtures(std::ostream& out) {
  const auto dir = fixture_dir();
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(dir))
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    std::string desc;
    try {
      const auto f = io::load_scenario(p, false);
      desc = f.notes.empty() ? f.name : f.notes.front();
    } catch (const Error& e) {
      desc = std::string("(unreadable: ") + e.what() + ")";
    }
    out << p.stem().string() << "  " << desc << "\n";
  }
  return kOk;
}

void add_source(CLI::App* c, Options& o) {
  c->add_option("--scenario", o.scenario, "Scenario JSON file");
  c->add_option("--fixture", o.fixture, "Bundled fixture name (see `fixtures list`)");
  c->add_option("--format", o.format, "Output format: text or json");
}

void add_targets(CLI::App* c, Options& o) {
  c->add_option("--target", o.targets, "x label to bound (repeatable)");
  c->add_flag("--all-targets", o.all_targets, "Bound every x label");
  c->add_option("--assume", o.assume, "Treat P(w,x) knowledge as marginals-only or candidates");
  c->add_option("--grid-n", o.grid_n, "Subintervals of the P(w,x) sweep for marginals-only knowledge")->check(CLI::PositiveNumber);
}

}  // namespace

std::filesystem::path fixture_dir() {
  if (const char* env = std::getenv("DCC_FIXTURE_DIR"); env && *env) return env;
  return DCC_FIXTURE_DIR_DEFAULT;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Identification bounds under differential covariate classification", "dcc"};
  app.require_subcommand(1);

  auto* validate = app.add_subcommand("validate", "Check a scenario file or a CSV count table");
  add_source(validate, o);
  validate->add_option("--counts", o.counts, "CSV count table to summarize");

  auto* bounds = app.add_subcommand("bounds", "Compute identification bounds");
  bounds->require_subcommand(1);
  auto* event = bounds->add_subcommand("event", "Bounds on P(y in B | x)");
  add_source(event, o);
  add_targets(event, o);
  event->add_option("--bv", o.bv, "Bounded-variation cap label=delta (repeatable)");
  event->add_flag("--assume-nested", o.assume_nested, "Assert P(w=k|x=k) = 1 for the target label k");
  event->add_option("--method", o.method, "lp or closed-form");
  event->add_option("--event", o.event, "Comma-separated outcome values forming B (non-binary y)");
  auto* mean = bounds->add_subcommand("mean", "Bounds on E(y | x)");
  add_source(mean, o);
  add_targets(mean, o);
  auto* quantile = bounds->add_subcommand("quantile", "Bounds on the alpha-quantile of P(y | x)");
  add_source(quantile, o);
  add_targets(quantile, o);
  quantile->add_option("--alpha", o.alpha, "Quantile level in (0, 1)");

  auto* oracle = app.add_subcommand("oracle", "Brute-force cross-checks");
  oracle->require_subcommand(1);
  auto* check = oracle->add_subcommand("check", "Compare LP bounds with grid enumeration");
  add_source(check, o);
  check->add_option("--target", o.targets, "x label to check (repeatable)");
  check->add_flag("--all-targets", o.all_targets, "Check every x label");
  check->add_option("--bv", o.bv, "Bounded-variation cap label=delta (repeatable)");
  check->add_option("--event", o.event, "Comma-separated outcome values forming B");
  check->add_option("--step", o.step, "Grid spacing in (0, 0.5]");
  check->add_option("--tol", o.tol, "Row equality tolerance (default step * |X|)");
  check->add_option("--budget", o.budget, "Maximum grid points");

  auto* fixtures = app.add_subcommand("fixtures", "Bundled scenario fixtures");
  fixtures->require_subcommand(1);
  auto* list = fixtures->add_subcommand("list", "List bundled fixtures");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (validate->parsed()) return cmd_validate(o, out);
    if (event->parsed()) return cmd_event(o, out);
    if (mean->parsed()) return cmd_mean_quantile(o, out, false);
    if (quantile->parsed()) return cmd_mean_quantile(o, out, true);
    if (check->parsed()) return cmd_oracle(o, out);
    if (list->parsed()) return cmd_fixtures(out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_for(e.code());
  }
  err << "error: no command\n";
  return kUsageError;
}

}  // namespace dcc::cli
