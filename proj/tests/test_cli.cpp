#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "prioqt/cli.hpp"
#include "prioqt/measures.hpp"
#include "prioqt/mm1_kernels.hpp"

using namespace prioqt;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "prioqt");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (std::size_t k = 0; k < line.size(); ++k) {
      const char ch = line[k];
      if (quoted && ch == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cells.back() += '"';
        ++k;
      } else if (ch == '"') {
        quoted = !quoted;
      } else if (ch == ',' && !quoted) {
        cells.emplace_back();
      } else {
        cells.back() += ch;
      }
    }
    rows.push_back(cells);
  }
  return rows;
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "prioqt_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("transform reduces to M/M/1") {
  auto out = scratch("mm1.csv");
  REQUIRE(run({"transform", "--servers", "1", "--lambda1", "0.4", "--lambda2", "0", "--alpha-re",
               "0.5", "--alpha-im", "0.5", "--states", "0,0", "-o", out.string()}) == 0);
  auto rows = parse_csv(slurp(out));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"i", "j", "re", "im"});
  const Complex alpha(0.5, 0.5);
  Complex ref = 1.0 / (0.4 * (1.0 - mm1::busy_period_lst(0.4, 1.0, alpha)) + alpha);
  CHECK(std::abs(Complex(std::stod(rows[1][2]), std::stod(rows[1][3])) - ref) < 1e-8);
}

TEST_CASE("JSON round trip is exact") {
  cli::Table t;
  t.columns = {"name", "x", "y"};
  t.add({cli::txt("a"), cli::num(0.1), cli::num(1.0 / 3.0)});
  t.add({cli::txt("b"), cli::num(-2.5e-300), cli::num(std::nextafter(1.0, 2.0))});
  auto back = cli::table_from_json(cli::to_json(t, "transform"));
  REQUIRE(back.columns == t.columns);
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      CHECK(back.rows[r][c].is_number == t.rows[r][c].is_number);
      if (t.rows[r][c].is_number)
        CHECK(std::memcmp(&back.rows[r][c].number, &t.rows[r][c].number, sizeof(double)) == 0);
      else
        CHECK(back.rows[r][c].text == t.rows[r][c].text);
    }

  auto out = scratch("t.json");
  REQUIRE(run({"transform", "-c", "2", "--format", "json", "-o", out.string()}) == 0);
  const std::string text = slurp(out);
  auto table = cli::table_from_json(text);
  CHECK(cli::to_json(table, "transform") == text);
}

TEST_CASE("CSV output is deterministic") {
  auto a = scratch("a.csv"), b = scratch("b.csv");
  std::vector<std::string> args{"transient", "-c", "2", "--lambda1", "0.6", "--lambda2", "0.8",
                                "--times", "0.5,3", "--states", "0,0", "1,1"};
  auto with = [&](const fs::path& p) {
    auto v = args;
    v.push_back("-o");
    v.push_back(p.string());
    return v;
  };
  REQUIRE(run(with(a)) == 0);
  REQUIRE(run(with(b)) == 0);
  CHECK(slurp(a) == slurp(b));
  for (const auto& row : parse_csv(slurp(a))) {
    if (row[0] == "measure" || row[0] == "mean_low") continue;
    double v = std::stod(row[2]);
    CHECK((v >= 0.0 && v <= 1.0));
  }
}

TEST_CASE("config file with flag override") {
  auto cfg = scratch("cfg.json");
  {
    std::ofstream f(cfg);
    f << R"({"servers": 1, "lambda1": 0.9, "lambda2": 0.0, "alpha_re": 0.5, "states": [[0, 0]]})";
  }
  auto out = scratch("cfg.csv");
  REQUIRE(run({"transform", "--config", cfg.string(), "--lambda1", "0.4", "-o", out.string()}) == 0);
  auto rows = parse_csv(slurp(out));
  REQUIRE(rows.size() == 2);
  Complex ref = 1.0 / (0.4 * (1.0 - mm1::busy_period_lst(0.4, 1.0, 0.5)) + 0.5);
  CHECK(std::stod(rows[1][2]) == doctest::Approx(ref.real()).epsilon(1e-8));
}

TEST_CASE("figures") {
  auto out = scratch("fig.csv");
  REQUIRE(run({"figures", "--times", "1,20,300", "-o", out.string()}) == 0);
  auto rows = parse_csv(slurp(out));
  std::map<std::string, std::vector<std::pair<double, double>>> curves;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    CHECK(rows[r][4] == "ok");
    curves[rows[r][0] + "/" + rows[r][1]].push_back({std::stod(rows[r][2]), std::stod(rows[r][3])});
  }
  REQUIRE(curves.size() == 5);
  for (const auto& [name, pts] : curves)
    for (std::size_t k = 1; k < pts.size(); ++k) CHECK(pts[k].first > pts[k - 1].first);
  CHECK(std::abs(curves["fig2/delay_high"].back().second - measures::erlang_c(10, 5.0)) < 1e-3);
  CHECK(curves["fig1_rho2=0.2/mean_low"].back().second < curves["fig1_rho2=0.4/mean_low"].back().second);
  CHECK(curves["fig1_rho2=0.4/mean_low"].back().second < curves["fig1_rho2=0.6/mean_low"].back().second);
}

TEST_CASE("exit codes") {
  CHECK(run({"stationary", "-c", "2", "--lambda1", "1.0", "--lambda2", "1.2"}) == 2);
  CHECK(run({"transient", "-c", "2"}) == 2);
  CHECK(run({"transform", "--mu1", "-1"}) == 2);
  CHECK(run({"transform", "--eps", "0"}) == 2);
  CHECK(run({"transform", "--alpha-re", "-1"}) == 2);
  CHECK(run({"--no-such-flag"}) == 2);
  CHECK(run({"validate", "--corrupt-g", "0.25"}) == 1);
}
