#include "mtreg/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtreg/errors.hpp"
#include "mtreg/kernels.hpp"

namespace mtreg::cli {
namespace {

using nlohmann::ordered_json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_cell(const std::string& raw, int row, const std::string& column) {
  const std::string t = trim(raw);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (t.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw CsvParseError("row " + std::to_string(row) + ", column '" + column +
                            "': cannot parse '" + raw + "' as a finite number",
                        row, column);
  }
  return v;
}

int column_index(const CsvTable& table, const std::string& name,
                 const std::string& path) {
  const auto it = std::find(table.header.begin(), table.header.end(), name);
  if (it == table.header.end()) {
    throw ColumnError("column '" + name + "' not found in " + path);
  }
  return static_cast<int>(it - table.header.begin());
}

std::vector<double> read_column(const CsvTable& table, int index,
                                const std::string& name) {
  std::vector<double> out;
  out.reserve(table.cells.size());
  for (std::size_t r = 0; r < table.cells.size(); ++r) {
    const auto& row = table.cells[r];
    out.push_back(parse_cell(row[index], static_cast<int>(r) + 1, name));
  }
  return out;
}

Dataset ingest_common(const std::string& path,
                      const std::string* response_col,
                      const std::vector<std::string>& explanatory_cols) {
  if (explanatory_cols.empty()) {
    throw UsageError("at least one explanatory column is required");
  }
  for (std::size_t i = 0; i < explanatory_cols.size(); ++i) {
    for (std::size_t j = i + 1; j < explanatory_cols.size(); ++j) {
      if (explanatory_cols[i] == explanatory_cols[j]) {
        throw UsageError("explanatory column '" + explanatory_cols[i] +
                         "' listed twice");
      }
    }
  }
  const CsvTable table = read_csv(path);
  Dataset ds;
  ds.n = static_cast<int>(table.cells.size());
  ds.m = static_cast<int>(explanatory_cols.size());
  ds.explanatory_names = explanatory_cols;
  if (response_col != nullptr) {
    ds.response_name = *response_col;
    ds.response = read_column(table, column_index(table, *response_col, path),
                              *response_col);
  }
  for (const std::string& name : explanatory_cols) {
    ds.explanatory.push_back(
        read_column(table, column_index(table, name, path), name));
  }
  if (ds.n < ds.m + 2) {
    throw InsufficientDataError(
        "dataset has " + std::to_string(ds.n) + " rows; fitting " +
        std::to_string(ds.m) + " explanatory variables needs at least " +
        std::to_string(ds.m + 2));
  }
  return ds;
}

// --- report building ---------------------------------------------------------

struct ResidualSummary {
  double rms = 0.0;
  double min = 0.0;
  double max = 0.0;
};

ResidualSummary summarize_residuals(const RegressionFit& fit) {
  ResidualSummary s;
  const auto& r = fit.residuals;
  s.rms = std::sqrt(kernels::dot(r, r) / static_cast<double>(r.size()));
  s.min = *std::min_element(r.begin(), r.end());
  s.max = *std::max_element(r.begin(), r.end());
  return s;
}

ordered_json fit_json(const RegressionFit& fit) {
  ordered_json j;
  j["n"] = fit.n;
  j["m"] = fit.m;
  j["beta_hat"] = fit.beta_hat;
  j["sigma_hat_sq_mle"] = fit.sigma_hat_sq_mle;
  j["sigma_hat_sq_unbiased"] = fit.sigma_hat_sq_unbiased;
  j["df"] = fit.df();
  const ResidualSummary rs = summarize_residuals(fit);
  j["residuals"] = {{"rms", rs.rms}, {"min", rs.min}, {"max", rs.max}};
  if (fit.stats.has_value()) {
    j["stats"] = {{"a_bar", fit.stats->a_bar}, {"x_bar", fit.stats->x_bar},
                  {"s_aa", fit.stats->s_aa},   {"s_xx", fit.stats->s_xx},
                  {"s_ax", fit.stats->s_ax}};
  }
  return j;
}

ordered_json interval_json(const IntervalReport& r) {
  ordered_json j;
  j["k"] = r.k;
  j["alpha"] = r.alpha;
  j["mode"] = to_string(r.mode);
  j["center"] = r.center;
  j["half_width"] = r.half_width;
  j["lo"] = r.lo;
  j["hi"] = r.hi;
  j["eta"] = r.eta;
  j["scale"] = r.scale;
  return j;
}

ordered_json test_json(const TestReport& r) {
  ordered_json j;
  j["k"] = r.k;
  j["null_value"] = r.null_value;
  j["alpha"] = r.alpha;
  j["mode"] = to_string(r.mode);
  j["statistic"] = r.statistic;
  j["threshold"] = r.threshold;
  j["rejected"] = r.rejected;
  return j;
}

ordered_json coverage_json(const CoverageReport& report) {
  ordered_json rows = ordered_json::array();
  for (const CoverageRow& row : report.rows) {
    ordered_json j;
    j["k"] = row.k;
    j["mode"] = to_string(row.mode);
    j["empirical_coverage"] = row.empirical_coverage;
    j["empirical_rejection_rate"] = row.empirical_rejection_rate;
    j["empirical_var_beta"] = row.empirical_var_beta;
    j["formula_var_beta"] = row.formula_var_beta;
    rows.push_back(std::move(j));
  }
  ordered_json j;
  j["replications"] = report.replications;
  j["master_seed"] = report.master_seed;
  j["alpha"] = report.alpha;
  j["rows"] = std::move(rows);
  return j;
}

void print_kv(std::ostream& out, const std::string& key,
              const std::string& value) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-24s%s", key.c_str(), value.c_str());
  out << buf << "\n";
}

void print_fit_text(std::ostream& out, const RegressionFit& fit) {
  out << "fit: n=" << fit.n << " m=" << fit.m << " df=" << fit.df() << "\n";
  for (std::size_t k = 0; k < fit.beta_hat.size(); ++k) {
    print_kv(out, "beta" + std::to_string(k), fmt17(fit.beta_hat[k]));
  }
  print_kv(out, "sigma_hat_sq_mle", fmt17(fit.sigma_hat_sq_mle));
  print_kv(out, "sigma_hat_sq_unbiased", fmt17(fit.sigma_hat_sq_unbiased));
  const ResidualSummary rs = summarize_residuals(fit);
  print_kv(out, "residual_rms", fmt17(rs.rms));
  print_kv(out, "residual_min", fmt17(rs.min));
  print_kv(out, "residual_max", fmt17(rs.max));
  if (fit.stats.has_value()) {
    print_kv(out, "a_bar", fmt17(fit.stats->a_bar));
    print_kv(out, "x_bar", fmt17(fit.stats->x_bar));
    print_kv(out, "s_aa", fmt17(fit.stats->s_aa));
    print_kv(out, "s_xx", fmt17(fit.stats->s_xx));
    print_kv(out, "s_ax", fmt17(fit.stats->s_ax));
  }
}

void print_intervals_text(std::ostream& out,
                          const std::vector<IntervalReport>& rows) {
  out << "k     mode             center                     "
         "half_width                 lo                         "
         "hi                         eta\n";
  for (const IntervalReport& r : rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-6d%-17s%-27s%-27s%-27s%-27s%s", r.k,
                  to_string(r.mode).c_str(), fmt17(r.center).c_str(),
                  fmt17(r.half_width).c_str(), fmt17(r.lo).c_str(),
                  fmt17(r.hi).c_str(), fmt17(r.eta).c_str());
    out << buf << "\n";
  }
}

void print_tests_text(std::ostream& out, const std::vector<TestReport>& rows) {
  out << "k     mode             null_value                 "
         "statistic                  threshold                  rejected\n";
  for (const TestReport& r : rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-6d%-17s%-27s%-27s%-27s%s", r.k,
                  to_string(r.mode).c_str(), fmt17(r.null_value).c_str(),
                  fmt17(r.statistic).c_str(), fmt17(r.threshold).c_str(),
                  r.rejected ? "yes" : "no");
    out << buf << "\n";
  }
}

void print_coverage_text(std::ostream& out, const CoverageReport& report) {
  out << "coverage: replications=" << report.replications
      << " seed=" << report.master_seed << " alpha=" << fmt17(report.alpha)
      << "\n";
  out << "k     mode             coverage                   "
         "rejection_rate             var_empirical              var_formula\n";
  for (const CoverageRow& r : report.rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-6d%-17s%-27s%-27s%-27s%s", r.k,
                  to_string(r.mode).c_str(),
                  fmt17(r.empirical_coverage).c_str(),
                  fmt17(r.empirical_rejection_rate).c_str(),
                  fmt17(r.empirical_var_beta).c_str(),
                  fmt17(r.formula_var_beta).c_str());
    out << buf << "\n";
  }
}

// --- command plumbing --------------------------------------------------------

std::vector<DivisorMode> modes_from_flag(const std::string& mode) {
  if (mode == "exact") return {DivisorMode::exact};
  if (mode == "paper-verbatim") return {DivisorMode::paper_verbatim};
  if (mode == "both") return {DivisorMode::exact, DivisorMode::paper_verbatim};
  throw UsageError("unknown mode '" + mode + "'");
}

RegressionFit fit_dataset(const Dataset& ds) {
  if (ds.m == 1) return fit_simple(ds.explanatory[0], ds.response);
  return fit_glm(ds.design(), ds.response);
}

std::vector<int> coef_list(int coef, int m) {
  if (coef >= 0) {
    if (coef > m) {
      throw UsageError("coefficient index " + std::to_string(coef) +
                       " out of range (0.." + std::to_string(m) + ")");
    }
    return {coef};
  }
  std::vector<int> all(m + 1);
  for (int k = 0; k <= m; ++k) all[k] = k;
  return all;
}

struct CommonFlags {
  std::string data;
  std::string response;
  std::vector<std::string> explanatory;
  std::string format = "text";
  std::string mode = "exact";
  double alpha = 0.05;
  int coef = -1;
  double null_value = 0.0;
  long reps = 10000;
  std::uint64_t seed = 0;
  double sigma = 1.0;
  std::vector<double> beta;
};

void check_alpha_flag(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw UsageError("--alpha must lie strictly between 0 and 1");
  }
}

struct Emitter {
  std::string format;
  ordered_json j;
  std::ostringstream text;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  explicit Emitter(const std::string& fmt, ordered_json command)
      : format(fmt) {
    j["command"] = std::move(command);
    j["fit"] = nullptr;
    j["intervals"] = nullptr;
    j["tests"] = nullptr;
    j["coverage"] = nullptr;
    j["seed"] = nullptr;
    j["mode"] = nullptr;
  }

  void finish() {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (format == "json") {
      j["timing"] = {{"elapsed_seconds", elapsed}};
      std::cout << j.dump(2) << "\n";
    } else {
      text << "elapsed_seconds         " << elapsed << "\n";
      std::cout << text.str();
    }
  }
};

int cmd_fit(const CommonFlags& f) {
  ordered_json cmd{{"name", "fit"},
                   {"data", f.data},
                   {"response", f.response},
                   {"explanatory", f.explanatory},
                   {"format", f.format}};
  Emitter em(f.format, std::move(cmd));
  const Dataset ds = ingest_csv(f.data, f.response, f.explanatory);
  const RegressionFit fit = fit_dataset(ds);
  em.j["fit"] = fit_json(fit);
  print_fit_text(em.text, fit);
  em.finish();
  return 0;
}

int cmd_ci(const CommonFlags& f) {
  check_alpha_flag(f.alpha);
  const std::vector<DivisorMode> modes = modes_from_flag(f.mode);
  ordered_json cmd{{"name", "ci"},          {"data", f.data},
                   {"response", f.response}, {"explanatory", f.explanatory},
                   {"alpha", f.alpha},       {"coef", f.coef},
                   {"mode", f.mode},         {"format", f.format}};
  Emitter em(f.format, std::move(cmd));
  const Dataset ds = ingest_csv(f.data, f.response, f.explanatory);
  const RegressionFit fit = fit_dataset(ds);
  std::vector<IntervalReport> rows;
  for (int k : coef_list(f.coef, ds.m)) {
    for (DivisorMode mode : modes) {
      rows.push_back(confidence_interval(fit, k, f.alpha, mode));
    }
  }
  em.j["fit"] = fit_json(fit);
  em.j["intervals"] = ordered_json::array();
  for (const auto& r : rows) em.j["intervals"].push_back(interval_json(r));
  em.j["mode"] = f.mode;
  print_fit_text(em.text, fit);
  print_intervals_text(em.text, rows);
  em.finish();
  return 0;
}

int cmd_test(const CommonFlags& f) {
  check_alpha_flag(f.alpha);
  const std::vector<DivisorMode> modes = modes_from_flag(f.mode);
  if (!std::isfinite(f.null_value)) {
    throw UsageError("--null must be finite");
  }
  ordered_json cmd{{"name", "test"},        {"data", f.data},
                   {"response", f.response}, {"explanatory", f.explanatory},
                   {"alpha", f.alpha},       {"coef", f.coef},
                   {"null", f.null_value},   {"mode", f.mode},
                   {"format", f.format}};
  Emitter em(f.format, std::move(cmd));
  const Dataset ds = ingest_csv(f.data, f.response, f.explanatory);
  const RegressionFit fit = fit_dataset(ds);
  std::vector<TestReport> rows;
  for (int k : coef_list(f.coef, ds.m)) {
    for (DivisorMode mode : modes) {
      rows.push_back(hypothesis_test(fit, k, f.null_value, f.alpha, mode));
    }
  }
  em.j["fit"] = fit_json(fit);
  em.j["tests"] = ordered_json::array();
  for (const auto& r : rows) em.j["tests"].push_back(test_json(r));
  em.j["mode"] = f.mode;
  print_fit_text(em.text, fit);
  print_tests_text(em.text, rows);
  em.finish();
  return 0;
}

int cmd_coverage(const CommonFlags& f) {
  check_alpha_flag(f.alpha);
  const std::vector<DivisorMode> modes = modes_from_flag(f.mode);
  if (!(f.sigma > 0.0) || !std::isfinite(f.sigma)) {
    throw UsageError("--sigma must be positive and finite");
  }
  if (f.reps < 1) throw UsageError("--reps must be at least 1");
  ordered_json cmd{{"name", "coverage"},    {"data", f.data},
                   {"explanatory", f.explanatory},
                   {"beta", f.beta},         {"sigma", f.sigma},
                   {"reps", f.reps},         {"seed", f.seed},
                   {"alpha", f.alpha},       {"mode", f.mode},
                   {"format", f.format}};
  Emitter em(f.format, std::move(cmd));
  const Dataset ds = ingest_design_csv(f.data, f.explanatory);
  if (static_cast<int>(f.beta.size()) != ds.m + 1) {
    throw UsageError("--beta needs " + std::to_string(ds.m + 1) +
                     " comma-separated values (intercept first)");
  }
  SimulationPlan plan{ds.design(),
                      TrueState{f.beta, f.sigma},
                      f.reps,
                      f.alpha,
                      f.seed,
                      modes};
  const CoverageReport report = run_coverage(plan);
  em.j["coverage"] = coverage_json(report);
  em.j["seed"] = report.master_seed;
  em.j["mode"] = f.mode;
  print_coverage_text(em.text, report);
  em.finish();
  return 0;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  bool have_header = false;
  int data_row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    ++data_row;
    if (fields.size() != table.header.size()) {
      throw CsvParseError(
          "row " + std::to_string(data_row) + ": expected " +
              std::to_string(table.header.size()) + " fields, got " +
              std::to_string(fields.size()),
          data_row, "");
    }
    table.cells.push_back(std::move(fields));
  }
  if (!have_header) {
    throw CsvParseError("'" + path + "' has no header row", 0, "");
  }
  return table;
}

Design Dataset::design() const {
  std::vector<double> row_major(static_cast<std::size_t>(n) * m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      row_major[static_cast<std::size_t>(i) * m + j] = explanatory[j][i];
    }
  }
  return Design(n, m, std::move(row_major));
}

Dataset ingest_csv(const std::string& path, const std::string& response_col,
                   const std::vector<std::string>& explanatory_cols) {
  return ingest_common(path, &response_col, explanatory_cols);
}

Dataset ingest_design_csv(const std::string& path,
                          const std::vector<std::string>& explanatory_cols) {
  return ingest_common(path, nullptr, explanatory_cols);
}

int exit_code_for(const std::exception& error) {
  if (dynamic_cast<const UsageError*>(&error)) return 2;
  if (dynamic_cast<const IoError*>(&error)) return 3;
  if (dynamic_cast<const ColumnError*>(&error)) return 4;
  if (dynamic_cast<const CsvParseError*>(&error)) return 5;
  if (dynamic_cast<const InsufficientDataError*>(&error)) return 6;
  if (dynamic_cast<const SingularDesignError*>(&error)) return 7;
  if (dynamic_cast<const Error*>(&error)) return 8;
  return 1;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"measurement-theoretic regression"};
  app.require_subcommand(1);

  CommonFlags f;
  auto add_data_flags = [&f](CLI::App* sub, bool with_response) {
    sub->add_option("--data", f.data, "CSV file")->required();
    if (with_response) {
      sub->add_option("--response", f.response, "response column")->required();
    }
    sub->add_option("--explanatory", f.explanatory,
                    "comma-separated explanatory columns")
        ->required()
        ->delimiter(',');
    sub->add_option("--format", f.format, "output format")
        ->check(CLI::IsMember({"text", "json"}));
  };
  auto add_mode_flag = [&f](CLI::App* sub) {
    sub->add_option("--mode", f.mode, "divisor mode")
        ->check(CLI::IsMember({"exact", "paper-verbatim", "both"}));
  };

  CLI::App* fit = app.add_subcommand("fit", "least-squares fit");
  add_data_flags(fit, true);

  CLI::App* ci = app.add_subcommand("ci", "studentized confidence intervals");
  add_data_flags(ci, true);
  add_mode_flag(ci);
  ci->add_option("--alpha", f.alpha, "significance level");
  ci->add_option("--coef", f.coef, "coefficient index (default: all)");

  CLI::App* test = app.add_subcommand("test", "coefficient hypothesis tests");
  add_data_flags(test, true);
  add_mode_flag(test);
  test->add_option("--alpha", f.alpha, "significance level");
  test->add_option("--coef", f.coef, "coefficient index (default: all)");
  test->add_option("--null", f.null_value, "null value (default 0)");

  CLI::App* coverage =
      app.add_subcommand("coverage", "Monte Carlo coverage of the intervals");
  add_data_flags(coverage, false);
  add_mode_flag(coverage);
  coverage->add_option("--alpha", f.alpha, "significance level");
  coverage->add_option("--beta", f.beta, "true coefficients, intercept first")
      ->required()
      ->delimiter(',');
  coverage->add_option("--sigma", f.sigma, "true noise scale")->required();
  coverage->add_option("--reps", f.reps, "replications");
  coverage->add_option("--seed", f.seed, "master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (fit->parsed()) return cmd_fit(f);
    if (ci->parsed()) return cmd_ci(f);
    if (test->parsed()) return cmd_test(f);
    if (coverage->parsed()) return cmd_coverage(f);
    throw UsageError("no subcommand given");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace mtreg::cli
