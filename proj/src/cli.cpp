#include "prioqt/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "prioqt/measures.hpp"
#include "prioqt/validation.hpp"

namespace prioqt::cli {

using nlohmann::json;

void RunConfig::validate() const {
  params.validate();
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  if (command == Command::transient && times.empty())
    throw DomainError("transient requires at least one time (--times)");
  for (double t : times)
    if (!(t > 0.0)) throw DomainError("times must be positive");
  for (const State& s : states)
    if (s.level < 0 || s.phase < 0) throw DomainError("states must have non-negative indices");
  if (alpha) require_transform_point(*alpha, false);
}

Table::Cell num(double v) { return {true, v, {}}; }
Table::Cell txt(std::string s) { return {false, 0.0, std::move(s)}; }

namespace {

// Fields holding commas, quotes or newlines are quoted with doubled quotes.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

}  // namespace

std::string to_csv(const Table& t) {
  std::ostringstream out;
  for (std::size_t k = 0; k < t.columns.size(); ++k) out << (k ? "," : "") << csv_field(t.columns[k]);
  out << '\n';
  char buf[64];
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out << ',';
      if (row[k].is_number) {
        std::snprintf(buf, sizeof buf, "%.17g", row[k].number);
        out << buf;
      } else {
        out << csv_field(row[k].text);
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string to_json(const Table& t, const std::string& command) {
  json rows = json::array();
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k].is_number)
        obj[t.columns[k]] = std::isfinite(row[k].number) ? json(row[k].number) : json(nullptr);
      else
        obj[t.columns[k]] = row[k].text;
    }
    rows.push_back(std::move(obj));
  }
  json doc{{"command", command}, {"columns", t.columns}, {"rows", std::move(rows)}};
  return doc.dump(2) + "\n";
}

Table table_from_json(const std::string& text) {
  const json doc = json::parse(text);
  Table t;
  t.columns = doc.at("columns").get<std::vector<std::string>>();
  for (const auto& obj : doc.at("rows")) {
    std::vector<Table::Cell> row;
    for (const auto& col : t.columns) {
      const auto& v = obj.at(col);
      if (v.is_string())
        row.push_back(txt(v.get<std::string>()));
      else if (v.is_null())
        row.push_back(num(std::nan("")));
      else
        row.push_back(num(v.get<double>()));
    }
    t.add(std::move(row));
  }
  return t;
}

namespace {

using Clock = std::chrono::steady_clock;

const char* command_name(Command c) {
  switch (c) {
    case Command::transform: return "transform";
    case Command::stationary: return "stationary";
    case Command::transient: return "transient";
    case Command::figures: return "figures";
    case Command::validate: return "validate";
  }
  return "?";
}

State parse_state(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw DomainError("state '" + s + "' is not of the form i,j");
  try {
    std::size_t a = 0, b = 0;
    const int i = std::stoi(s.substr(0, comma), &a);
    const int j = std::stoi(s.substr(comma + 1), &b);
    if (a != comma || b != s.size() - comma - 1) throw std::invalid_argument(s);
    return {i, j};
  } catch (const std::logic_error&) {
    throw DomainError("state '" + s + "' is not of the form i,j");
  }
}

void apply_json_config(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DomainError("config file " + path + ": " + e.what());
  }
  auto get = [&](const char* key, auto& target) {
    if (doc.contains(key)) doc.at(key).get_to(target);
  };
  get("lambda1", cfg.params.lambda1);
  get("lambda2", cfg.params.lambda2);
  get("mu1", cfg.params.mu1);
  get("mu2", cfg.params.mu2);
  get("servers", cfg.params.servers);
  get("eps", cfg.eps);
  get("times", cfg.times);
  get("rho2_set", cfg.rho2_set);
  get("output", cfg.output);
  if (doc.contains("alpha_re") || doc.contains("alpha_im"))
    cfg.alpha = Complex(doc.value("alpha_re", 0.0), doc.value("alpha_im", 0.0));
  if (doc.contains("states")) {
    cfg.states.clear();
    for (const auto& s : doc.at("states")) cfg.states.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
  }
  if (doc.contains("format")) {
    const auto f = doc.at("format").get<std::string>();
    if (f != "csv" && f != "json") throw DomainError("format must be csv or json");
    cfg.format = f == "csv" ? Format::csv : Format::json;
  }
}

std::vector<State> default_states(int c) {
  std::vector<State> st;
  for (int i = 0; i <= 5; ++i)
    for (int j = 0; j <= c + 5; ++j) st.push_back({i, j});
  return st;
}

struct Outcome {
  Table table;
  std::vector<std::string> summary;
  int exit_code = 0;
};

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome cmd_transform(const RunConfig& cfg) {
  const Complex alpha = cfg.alpha.value_or(Complex(0.5, 0.5));
  const auto t0 = Clock::now();
  engine::EngineOptions opts;
  opts.eps = cfg.eps;
  auto field = engine::transform_field(cfg.params, alpha, opts);
  const auto states = cfg.states.empty() ? default_states(cfg.params.servers) : cfg.states;
  Outcome out;
  out.table.columns = {"i", "j", "re", "im"};
  for (const State& s : states) {
    field.extend_to(s.level);
    const Complex v = field.transform_at(s);
    out.table.add({num(s.level), num(s.phase), num(v.real()), num(v.imag())});
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  const Complex psi = field.psi().cumulative(field.box_levels());
  out.summary = {"alpha = " + fmt("%.17g", alpha.real()) + fmt(" %+.17gi", alpha.imag()),
                 "box levels k = " + std::to_string(field.box_levels()),
                 "Psi_k = " + fmt("%.17g", psi.real()) + fmt(" %+.17gi", psi.imag()),
                 "wall clock " + fmt("%.3f s", elapsed)};
  return out;
}

Outcome cmd_stationary(const RunConfig& cfg) {
  engine::StationaryOptions opts;
  opts.eps = std::min(cfg.eps, opts.eps);
  auto field = engine::stationary_field(cfg.params, opts);
  const auto states = cfg.states.empty() ? default_states(cfg.params.servers) : cfg.states;
  Outcome out;
  out.table.columns = {"i", "j", "p"};
  for (const State& s : states) {
    field.extend_to(s.level);
    out.table.add({num(s.level), num(s.phase), num(field.probability(s))});
  }
  out.summary = {
      "box levels k = " + std::to_string(field.box_levels()),
      "p_origin = " + fmt("%.17g", field.p_origin()),
      "mean low-priority = " + fmt("%.17g", measures::stationary_mean_low(field)),
      "delay high = " + fmt("%.17g", measures::stationary_delay(measures::PriorityClass::high, field)),
      "delay low = " + fmt("%.17g", measures::stationary_delay(measures::PriorityClass::low, field))};
  return out;
}

void append_series(Table& table, const std::vector<measures::MeasureSeries>& series,
                   const std::string& label, Outcome& out) {
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.times.size(); ++k) {
      std::vector<Table::Cell> row;
      if (!label.empty()) row.push_back(txt(label));
      row.push_back(txt(s.measure.name()));
      row.push_back(num(s.times[k]));
      row.push_back(num(s.values[k]));
      row.push_back(txt(s.failed[k] ? "failed" : "ok"));
      table.add(std::move(row));
      if (s.failed[k]) out.exit_code = 2;
    }
    if (s.clipped > 0)
      out.summary.push_back(s.measure.name() + (label.empty() ? "" : " [" + label + "]") +
                            ": clipped " + std::to_string(s.clipped) + " point(s) to [0,1]");
  }
}

Outcome cmd_transient(const RunConfig& cfg) {
  std::vector<measures::MeasureSpec> specs;
  for (const State& s : cfg.states) specs.push_back({measures::MeasureKind::transition_prob, s, 0});
  specs.push_back({measures::MeasureKind::mean_low, {}, 0});
  specs.push_back({measures::MeasureKind::delay_high, {}, 0});
  specs.push_back({measures::MeasureKind::delay_low, {}, 0});
  measures::InversionConfig inv;
  inv.time_grid = cfg.times;
  Outcome out;
  out.table.columns = {"measure", "t", "value", "status"};
  const auto t0 = Clock::now();
  append_series(out.table, measures::compute_series(specs, measures::default_factory(cfg.params), inv),
                "", out);
  out.summary.push_back("contour points per time = " + std::to_string(inv.evaluations()));
  out.summary.push_back(
      "wall clock " + fmt("%.3f s", std::chrono::duration<double>(Clock::now() - t0).count()));
  return out;
}

std::vector<double> default_figure_times() {
  std::vector<double> t{1, 2, 5};
  for (int k = 1; k <= 50; ++k) t.push_back(10.0 * k);
  return t;
}

Outcome cmd_figures(const RunConfig& cfg) {
  measures::InversionConfig inv;
  inv.time_grid = cfg.times.empty() ? default_figure_times() : cfg.times;
  Outcome out;
  out.table.columns = {"curve", "measure", "t", "value", "status"};
  const int c = cfg.params.servers;
  const double rho1 = cfg.params.rho1();
  for (double rho2 : cfg.rho2_set) {
    const auto p = ModelParams::from_loads(c, rho1, rho2, cfg.params.mu1, cfg.params.mu2);
    append_series(out.table,
                  measures::compute_series({{measures::MeasureKind::mean_low, {}, 0}},
                                           measures::default_factory(p), inv),
                  "fig1_rho2=" + fmt("%g", rho2), out);
  }
  append_series(out.table,
                measures::compute_series({{measures::MeasureKind::delay_high, {}, 0},
                                          {measures::MeasureKind::delay_low, {}, 0}},
                                         measures::default_factory(cfg.params), inv),
                "fig2", out);
  if (cfg.params.rho2() < 1.0 && cfg.params.lambda2 > 0.0)
    out.summary.push_back("Erlang-C(" + std::to_string(c) + ", " + fmt("%g", cfg.params.lambda2 / cfg.params.mu2) +
                          ") = " + fmt("%.17g", measures::erlang_c(c, cfg.params.lambda2 / cfg.params.mu2)));
  return out;
}

Outcome cmd_validate(const RunConfig& cfg) {
  Outcome out;
  out.table.columns = {"check", "passed", "max_dev", "tol"};
  validation::ValidationOptions opts;
  opts.corrupt_G = cfg.corrupt_G;
  const auto results = validation::run_acceptance(opts, [](const validation::CheckResult& r) {
    std::cout << validation::format_line(r) << std::endl;
  });
  int failed = 0;
  for (const auto& r : results) {
    out.table.add({txt(r.name), txt(r.passed ? "true" : "false"), num(r.max_dev), num(r.tol)});
    if (!r.passed) {
      ++failed;
      out.summary.push_back("failed: " + r.name);
    }
  }
  out.summary.push_back(std::to_string(results.size() - failed) + "/" +
                        std::to_string(results.size()) + " checks passed");
  out.exit_code = failed ? 1 : 0;
  return out;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Transient and stationary analysis of a two-class preemptive-priority M/M/c queue"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  cfg.params = ModelParams::from_loads(10, 1.0 / 3.0, 0.5);
  double alpha_re = 0.5, alpha_im = 0.5;
  std::vector<std::string> state_args;
  std::string config_path, format = "csv";

  auto* o_l1 = app.add_option("--lambda1", cfg.params.lambda1, "low-priority arrival rate");
  auto* o_l2 = app.add_option("--lambda2", cfg.params.lambda2, "high-priority arrival rate");
  auto* o_m1 = app.add_option("--mu1", cfg.params.mu1, "low-priority service rate");
  auto* o_m2 = app.add_option("--mu2", cfg.params.mu2, "high-priority service rate");
  auto* o_c = app.add_option("--servers,-c", cfg.params.servers, "number of servers");
  auto* o_are = app.add_option("--alpha-re", alpha_re, "real part of the transform point");
  auto* o_aim = app.add_option("--alpha-im", alpha_im, "imaginary part of the transform point");
  auto* o_eps = app.add_option("--eps", cfg.eps, "box tolerance");
  auto* o_times = app.add_option("--times", cfg.times, "time points")->delimiter(',');
  auto* o_states = app.add_option("--states", state_args, "states as i,j (space separated)");
  auto* o_rho2 = app.add_option("--rho2-set", cfg.rho2_set, "figure-1 high-priority loads")->delimiter(',');
  auto* o_out = app.add_option("--output,-o", cfg.output, "data file (default: stdout)");
  auto* o_fmt = app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--config", config_path, "JSON config; flags override its values");
  app.add_option("--corrupt-g", cfg.corrupt_G, "validate: perturb G entries (negative control)");

  auto* sc_transform = app.add_subcommand("transform", "transforms pi_(i,j)(alpha)");
  auto* sc_stationary = app.add_subcommand("stationary", "stationary probabilities");
  auto* sc_transient = app.add_subcommand("transient", "time-dependent measures");
  auto* sc_figures = app.add_subcommand("figures", "mean and delay curves over time");
  auto* sc_validate = app.add_subcommand("validate", "acceptance checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sc_transform->parsed()) cfg.command = Command::transform;
    if (sc_stationary->parsed()) cfg.command = Command::stationary;
    if (sc_transient->parsed()) cfg.command = Command::transient;
    if (sc_figures->parsed()) cfg.command = Command::figures;
    if (sc_validate->parsed()) cfg.command = Command::validate;

    if (!config_path.empty()) {
      // Flags win: load the file, then re-apply the values given on the command line.
      RunConfig flags = cfg;
      apply_json_config(config_path, cfg);
      if (o_l1->count()) cfg.params.lambda1 = flags.params.lambda1;
      if (o_l2->count()) cfg.params.lambda2 = flags.params.lambda2;
      if (o_m1->count()) cfg.params.mu1 = flags.params.mu1;
      if (o_m2->count()) cfg.params.mu2 = flags.params.mu2;
      if (o_c->count()) cfg.params.servers = flags.params.servers;
      if (o_eps->count()) cfg.eps = flags.eps;
      if (o_times->count()) cfg.times = flags.times;
      if (o_rho2->count()) cfg.rho2_set = flags.rho2_set;
      if (o_out->count()) cfg.output = flags.output;
    }
    Complex alpha = cfg.alpha.value_or(Complex(alpha_re, alpha_im));
    if (o_are->count()) alpha.real(alpha_re);
    if (o_aim->count()) alpha.imag(alpha_im);
    cfg.alpha = alpha;
    if (o_states->count()) {
      cfg.states.clear();
      for (const auto& s : state_args) cfg.states.push_back(parse_state(s));
    }
    if (o_fmt->count()) cfg.format = format == "json" ? Format::json : Format::csv;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  Outcome out;
  try {
    switch (cfg.command) {
      case Command::transform: out = cmd_transform(cfg); break;
      case Command::stationary: out = cmd_stationary(cfg); break;
      case Command::transient: out = cmd_transient(cfg); break;
      case Command::figures: out = cmd_figures(cfg); break;
      case Command::validate: out = cmd_validate(cfg); break;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << command_name(cfg.command) << ": " << e.what() << "\n";
    return 2;
  }

  for (const auto& line : out.summary) std::cout << line << "\n";
  const std::string data = cfg.format == Format::json ? to_json(out.table, command_name(cfg.command))
                                                      : to_csv(out.table);
  if (cfg.output.empty()) {
    if (cfg.command != Command::validate) std::cout << data;
  } else {
    std::ofstream file(cfg.output, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot write " << cfg.output << "\n";
      return 2;
    }
    file << data;
  }
  return out.exit_code;
}

}  // namespace prioqt::cli
