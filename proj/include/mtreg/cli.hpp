#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtreg/hyptest.hpp"
#include "mtreg/regression.hpp"
#include "mtreg/simulate.hpp"

namespace mtreg::cli {

// CLI-layer failures map onto distinct process exit codes (see exit_code_for).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ColumnError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CsvParseError : std::runtime_error {
  CsvParseError(const std::string& msg, int row, std::string column)
      : std::runtime_error(msg), row(row), column(std::move(column)) {}
  int row = 0;          // 1-based data row (the header is row 0)
  std::string column;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> cells;  // raw fields, row-major
};

CsvTable read_csv(const std::string& path);

struct Dataset {
  int n = 0;
  int m = 0;
  std::string response_name;
  std::vector<std::string> explanatory_names;
  std::vector<double> response;
  std::vector<std::vector<double>> explanatory;  // one vector per variable

  Design design() const;
};

// Loads named columns from a CSV file. Every referenced cell must parse as a
// finite number; errors name the data row and column.
Dataset ingest_csv(const std::string& path, const std::string& response_col,
                   const std::vector<std::string>& explanatory_cols);

// Variant without a response column (the coverage command synthesizes its
// own responses).
Dataset ingest_design_csv(const std::string& path,
                          const std::vector<std::string>& explanatory_cols);

// Full command-line entry point; returns the process exit code and writes
// results to stdout, diagnostics to stderr.
int run_cli(int argc, const char* const* argv);

int exit_code_for(const std::exception& error);

}  // namespace mtreg::cli
