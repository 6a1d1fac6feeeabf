#ifndef PRIOQT_CLI_HPP
#define PRIOQT_CLI_HPP

#include <optional>
#include <string>
#include <vector>

#include "prioqt/model.hpp"

namespace prioqt::cli {

enum class Command { transform, stationary, transient, figures, validate };
enum class Format { csv, json };

struct RunConfig {
  ModelParams params;
  Command command = Command::transform;
  std::optional<Complex> alpha;
  std::vector<double> times;
  std::vector<State> states;
  std::vector<double> rho2_set{0.2, 0.4, 0.6};
  double eps = 1e-8;
  std::string output;  ///< empty: data goes to stdout
  Format format = Format::csv;
  double corrupt_G = 0.0;

  /// Throws DomainError on invalid rates, eps <= 0 or missing transient times.
  void validate() const;
};

/// A table of named columns; every cell is either a number or a string.
struct Table {
  std::vector<std::string> columns;
  struct Cell {
    bool is_number = true;
    double number = 0.0;
    std::string text;
  };
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

Table::Cell num(double v);
Table::Cell txt(std::string s);

/// Numbers use 17 significant digits.
std::string to_csv(const Table& t);
std::string to_json(const Table& t, const std::string& command);
Table table_from_json(const std::string& text);

/// Entry point; returns the process exit code (0 ok, 1 validation failure,
/// 2 usage or solver error).
int run_cli(int argc, char** argv);

}  // namespace prioqt::cli

#endif  // PRIOQT_CLI_HPP
