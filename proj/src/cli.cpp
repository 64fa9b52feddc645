#include "dynbc/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <numbers>
#include <optional>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "dynbc/errors.hpp"
#include "dynbc/fd_oracle.hpp"

namespace dynbc::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  const char* begin = v.c_str();
  char* end = nullptr;
  const double x = std::strtod(begin, &end);
  if (v.empty() || end != begin + v.size() || !std::isfinite(x)) {
    throw ConfigError(key + ": expected a finite number, got '" + v + "'");
  }
  return x;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int x{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return x;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated list of numbers");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto dbl = [&t](const char* k, double RunConfig::*f) {
      t[k] = [f](RunConfig& c, const std::string& key, const std::string& v) { c.*f = parse_double(key, v); };
    };
    auto integer = [&t](const char* k, int RunConfig::*f) {
      t[k] = [f](RunConfig& c, const std::string& key, const std::string& v) { c.*f = parse_int<int>(key, v); };
    };
    auto str = [&t](const char* k, std::string RunConfig::*f) {
      t[k] = [f](RunConfig& c, const std::string&, const std::string& v) { c.*f = v; };
    };
    dbl("b0", &RunConfig::b0);
    dbl("b1", &RunConfig::b1);
    integer("N", &RunConfig::N);
    integer("M", &RunConfig::M);
    dbl("dt", &RunConfig::dt);
    dbl("T", &RunConfig::T);
    dbl("t0", &RunConfig::t0);
    t["seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.seed = parse_int<std::uint64_t>(k, v);
    };
    integer("n_paths", &RunConfig::n_paths);
    integer("quad_panels", &RunConfig::quad_panels);
    integer("quad_nodes", &RunConfig::quad_nodes);
    str("coefficients", &RunConfig::coefficients);
    dbl("gamma", &RunConfig::gamma);
    dbl("h0", &RunConfig::h0);
    dbl("h1", &RunConfig::h1);
    t["f_table"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.f_table = parse_list(k, v); };
    t["g_table"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.g_table = parse_list(k, v); };
    str("initial", &RunConfig::initial);
    integer("paths_written", &RunConfig::paths_written);
    str("problem", &RunConfig::problem);
    dbl("radius", &RunConfig::radius);
    t["policies"] = [](RunConfig& c, const std::string&, const std::string& v) { c.policies = split_policy_list(v); };
    integer("nested_inner_paths", &RunConfig::nested_inner_paths);
    integer("nested_directions", &RunConfig::nested_directions);
    dbl("nested_bump", &RunConfig::nested_bump);
    integer("fd_cells", &RunConfig::fd_cells);
    integer("semigroup_modes", &RunConfig::semigroup_modes);
    integer("hs_modes", &RunConfig::hs_modes);
    dbl("hs_t_min", &RunConfig::hs_t_min);
    dbl("hs_t_max", &RunConfig::hs_t_max);
    integer("ito_paths", &RunConfig::ito_paths);
    integer("hamiltonian_pairs", &RunConfig::hamiltonian_pairs);
    t["threads"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.threads = parse_int<unsigned>(k, v);
    };
    str("out", &RunConfig::out);
    return t;
  }();
  return table;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

bool valid_policy_name(const std::string& s) {
  static const std::set<std::string> plain{"zero", "constant_grid", "feedback(terminal_proxy)",
                                            "feedback(nested_mc)", "feedback(zero)"};
  if (plain.count(s)) return true;
  if (s.rfind("constant(", 0) == 0 && s.back() == ')') {
    const auto inner = s.substr(9, s.size() - 10);
    const auto comma = inner.find(',');
    if (comma == std::string::npos) return false;
    try {
      parse_double("policy", trim(inner.substr(0, comma)));
      parse_double("policy", trim(inner.substr(comma + 1)));
      return true;
    } catch (const ConfigError&) {
      return false;
    }
  }
  return false;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char ch : s) out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-') ? ch : '_';
  return out;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + p.string());
  os << content;
  if (!os) throw ConfigError("failed writing " + p.string());
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void prepare_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw ConfigError("cannot create output directory " + out.string());
}

}  // namespace

std::vector<std::string> split_policy_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else if (ch != ' ' && ch != '\t') {
      cur += ch;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

SimConfig RunConfig::sim() const {
  SimConfig s;
  s.N = N;
  s.M = M;
  s.dt = dt;
  s.T = T;
  s.t0 = t0;
  s.seed = seed;
  return s;
}

QuadratureRule RunConfig::quadrature() const { return composite_gauss_legendre(quad_panels, quad_nodes); }

void RunConfig::validate() const {
  try {
    BoundaryParams check(b0, b1);
    (void)check;
    sim().validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  require(n_paths >= 1, "n_paths must be at least 1");
  require(quad_panels >= 1, "quad_panels must be at least 1");
  require(quad_nodes >= 1 && quad_nodes <= 64, "quad_nodes must be in [1, 64]");
  static const std::set<std::string> coeff_names{"zero", "additive", "multiplicative", "benchmark", "tabulated"};
  require(coeff_names.count(coefficients) > 0, "unknown coefficients '" + coefficients + "'");
  if (coefficients == "tabulated") {
    require(!f_table.empty() && !g_table.empty(), "tabulated coefficients need f_table and g_table");
  }
  static const std::set<std::string> init_names{"benchmark", "bump", "zero"};
  require(init_names.count(initial) > 0, "unknown initial state '" + initial + "'");
  require(paths_written >= 0, "paths_written must be nonnegative");
  require(problem == "benchmark", "unknown control problem '" + problem + "'");
  require(radius > 0.0, "radius must be positive");
  require(!policies.empty(), "policies must not be empty");
  for (const auto& p : policies) require(valid_policy_name(p), "unknown policy '" + p + "'");
  require(nested_inner_paths >= 1, "nested_inner_paths must be at least 1");
  require(nested_directions >= 0, "nested_directions must be nonnegative");
  require(nested_bump > 0.0, "nested_bump must be positive");
  require(fd_cells >= 8, "fd_cells must be at least 8");
  require(semigroup_modes >= 1, "semigroup_modes must be at least 1");
  require(hs_modes >= 1, "hs_modes must be at least 1");
  require(hs_t_min > 0.0 && hs_t_min < hs_t_max, "hs_t_min and hs_t_max must satisfy 0 < hs_t_min < hs_t_max");
  require(ito_paths >= 2, "ito_paths must be at least 2");
  require(hamiltonian_pairs >= 1, "hamiltonian_pairs must be at least 1");
  require(threads >= 1, "threads must be at least 1");
}

RunConfig parse_config(std::istream& in) {
  RunConfig c;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError("repeated key '" + key + "'");
    it->second(c, key, value);
  }
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in);
}

Coefficients make_coefficients(const RunConfig& c) {
  if (c.coefficients == "zero") return zero_coefficients();
  if (c.coefficients == "additive") return additive_coefficients(c.gamma, c.h0, c.h1);
  if (c.coefficients == "multiplicative") return multiplicative_coefficients(c.h0, c.h1);
  if (c.coefficients == "tabulated") return tabulated_coefficients(c.f_table, c.g_table, c.h0, c.h1);
  if (c.coefficients == "benchmark") return benchmark().coeffs;
  throw ConfigError("unknown coefficients '" + c.coefficients + "'");
}

ModalState make_initial(const RunConfig& c, const EigenBasis& basis) {
  if (c.initial == "zero") return ModalState(basis.size());
  if (c.initial == "bump") {
    return project(sample_state([](double x) { return x * (1.0 - x); }, 0.0, 0.0, basis.quad()), basis);
  }
  return benchmark_initial(basis);
}

ControlProblem make_problem(const RunConfig& c) {
  ControlProblem p = benchmark().problem;
  p.Z = AdmissibleSet::ball(c.radius);
  p.t0 = c.t0;
  p.T = c.T;
  return p;
}

std::vector<Policy> make_policies(const RunConfig& c, const ControlProblem& problem,
                                  const Coefficients& coeffs, const EigenBasis& basis) {
  std::vector<Policy> out;
  for (const auto& name : c.policies) {
    if (name == "zero") {
      out.push_back(Policy::zero());
    } else if (name == "constant_grid") {
      for (auto& p : constant_grid_policies()) out.push_back(p);
    } else if (name == "feedback(terminal_proxy)") {
      out.push_back(Policy::feedback(terminal_proxy(problem, coeffs, basis)));
    } else if (name == "feedback(zero)") {
      out.push_back(Policy::feedback(zero_gradient(basis.size())));
    } else if (name == "feedback(nested_mc)") {
      NestedMcOptions o;
      o.inner_paths = c.nested_inner_paths;
      o.directions = c.nested_directions;
      o.bump = c.nested_bump;
      o.seed = c.seed;
      out.push_back(Policy::feedback(nested_mc(problem, coeffs, basis, c.sim(), o)));
    } else if (name.rfind("constant(", 0) == 0) {
      const auto inner = name.substr(9, name.size() - 10);
      const auto comma = inner.find(',');
      out.push_back(Policy::constant({parse_double("policy", trim(inner.substr(0, comma))),
                                      parse_double("policy", trim(inner.substr(comma + 1)))}));
    } else {
      throw ConfigError("unknown policy '" + name + "'");
    }
  }
  return out;
}

int cmd_spectrum(const RunConfig& c, const fs::path& out, std::ostream& log) {
  prepare_out(out);
  const auto p = c.params();
  const auto basis = EigenBasis::build(p, c.N, c.quadrature());
  const auto op = fd::build(c.fd_cells, p);
  const auto fd_eig = fd::eigenvalues(op, static_cast<std::size_t>(c.N));

  std::ostringstream csv;
  csv << "j,lambda,B,trace0,trace1,bracket_lo,bracket_hi,fd_lambda,rel_err\n";
  constexpr double pi2 = std::numbers::pi * std::numbers::pi;
  int index_mismatch = 0;
  double worst_rel = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const auto& m = basis.mode(j);
    const int gap = dirichlet_gap(m.lambda);
    const double lo = -pi2 * (gap + 1) * (gap + 1);
    const double hi = -pi2 * gap * gap + 0.0;  // no negative zero in the csv
    if (gap != static_cast<int>(j)) ++index_mismatch;
    const double rel = std::abs(fd_eig[j] - m.lambda) / std::abs(m.lambda);
    worst_rel = std::max(worst_rel, rel);
    csv << m.j << ',' << format_double(m.lambda) << ',' << format_double(m.B) << ','
        << format_double(m.trace0) << ',' << format_double(m.trace1) << ',' << format_double(lo) << ','
        << format_double(hi) << ',' << format_double(fd_eig[j]) << ',' << format_double(rel) << '\n';
  }
  write_file(out / "spectrum.csv", csv.str());

  std::vector<CheckResult> checks;
  checks.push_back(check_gap_structure({p}, c.N));
  checks.push_back(check_gram(basis));
  checks.push_back(CheckResult{"fd_eigenvalues", worst_rel <= 1e-3, worst_rel, 1e-3,
                               "max relative error against the finite-element pencil, n=" +
                                   std::to_string(c.fd_cells),
                               false});
  auto literal = check_index_brackets({p}, c.N);
  literal.informational = true;
  checks.push_back(literal);

  bool ok = true;
  nlohmann::json inv = nlohmann::json::array();
  for (const auto& r : checks) {
    inv.push_back(to_json(r));
    if (!r.informational) ok = ok && r.passed;
    log << format_line(r) << '\n';
  }
  nlohmann::json summary{{"b0", p.b0},
                         {"b1", p.b1},
                         {"N", c.N},
                         {"fd_cells", c.fd_cells},
                         {"index_bracket_mismatches", index_mismatch},
                         {"max_rel_err", worst_rel},
                         {"invariants", inv},
                         {"passed", ok},
                         {"basis", to_json(basis)}};
  write_file(out / "spectrum.json", dump(summary));
  return ok ? 0 : 1;
}

int cmd_simulate(const RunConfig& c, const fs::path& out, std::ostream& log) {
  prepare_out(out);
  const auto basis = EigenBasis::build(c.params(), c.N, c.quadrature());
  const auto coeffs = make_coefficients(c);
  const auto init = make_initial(c, basis);
  const SimConfig sim = c.sim();
  const ModalStepper stepper(coeffs, basis, c.M);
  const int written = std::min(c.paths_written, c.n_paths);
  for (int i = 0; i < written; ++i) {
    const auto path =
        simulate_path(sim, stepper, init, keyed_increments({sim.seed, static_cast<std::uint32_t>(i), 0}));
    std::ostringstream os;
    write_path_csv(os, path);
    write_file(out / ("path_" + std::to_string(i) + ".csv"), os.str());
  }
  if (c.n_paths >= 2) {
    const auto rep = ensemble_stats(sim, coeffs, basis, init, static_cast<std::size_t>(c.n_paths), c.threads);
    auto j = to_json(rep);
    j["coefficients"] = coeffs.name;
    j["b0"] = c.b0;
    j["b1"] = c.b1;
    write_file(out / "ensemble.json", dump(j));
    log << "ensemble of " << c.n_paths << " paths, E|u(T)| = " << format_double(rep.mean_norm) << '\n';
  }
  log << "wrote " << written << " path file(s) to " << out.string() << '\n';
  return 0;
}

int cmd_control(const RunConfig& c, const fs::path& out, std::ostream& log) {
  prepare_out(out);
  const auto basis = EigenBasis::build(c.params(), c.N, c.quadrature());
  const auto coeffs = make_coefficients(c);
  const auto init = make_initial(c, basis);
  const auto problem = make_problem(c);
  const auto policies = make_policies(c, problem, coeffs, basis);
  const SimConfig sim = c.sim();
  if (policies.size() < 2) throw ConfigError("control needs at least two policies");
  if (c.n_paths < 2) throw ConfigError("control needs n_paths >= 2");
  const auto rep = compare_policies(problem, policies, sim, coeffs, basis, init,
                                    static_cast<std::size_t>(c.n_paths), c.threads);
  write_file(out / "report.json", dump(to_json(rep)));
  bool admissible = true;
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const auto cp = closed_loop_simulate(problem, policies[i], sim, coeffs, basis, init, 0);
    for (const auto& z : cp.controls) admissible = admissible && problem.Z.contains(z);
    std::ostringstream os;
    write_trace_csv(os, cp);
    write_file(out / ("trace_" + std::to_string(i) + "_" + sanitize(policies[i].name()) + ".csv"), os.str());
    log << policies[i].name() << ": J = " << format_double(rep.estimates[i].J) << " +- "
        << format_double(rep.estimates[i].se) << '\n';
  }
  for (const auto& pw : rep.pairwise) {
    log << pw.a << " - " << pw.b << " = " << format_double(pw.diff) << " +- " << format_double(pw.paired_se)
        << " (" << pw.verdict << ")\n";
  }
  return admissible ? 0 : 1;
}

int cmd_validate(const RunConfig& c, const fs::path& out, std::ostream& log) {
  prepare_out(out);
  const auto p = c.params();
  std::vector<CheckResult> checks;
  auto literal = check_index_brackets({p}, c.N);
  literal.informational = true;
  checks.push_back(literal);
  checks.push_back(check_gap_structure({p}, c.N));
  EigenBasis basis = EigenBasis::build(p, c.N, c.quadrature());
  checks.push_back(check_gram(basis));
  checks.push_back(check_form_association(basis));
  checks.push_back(check_det_positive(p));
  for (auto& r : check_fd_equivalence({p}, c.N, c.fd_cells)) checks.push_back(r);
  checks.push_back(check_hs_rate(p, c.hs_modes, c.hs_t_min, c.hs_t_max));
  checks.push_back(check_semigroup_vs_fd(p, c.semigroup_modes, c.fd_cells));
  {
    const auto add = additive_coefficients(c.gamma, c.h0, c.h1);
    checks.push_back(check_ito_isometry(basis, add, c.sim(), make_initial(c, basis),
                                        static_cast<std::size_t>(c.ito_paths), c.threads));
  }
  for (auto& r : check_hamiltonian_oracle(c.hamiltonian_pairs, 1e-3, c.seed + 1)) checks.push_back(r);

  bool ok = true;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : checks) {
    log << format_line(r) << '\n';
    if (!r.informational) ok = ok && r.passed;
    arr.push_back(to_json(r));
  }
  write_file(out / "validate.json", dump({{"checks", arr}, {"passed", ok}}));
  log << (ok ? "all invariants pass" : "invariant failure") << '\n';
  return ok ? 0 : 1;
}

namespace {

void error_record(const std::string& kind, const std::string& message, const std::string& out_dir) {
  const nlohmann::json rec{{"error", kind}, {"message", message}};
  std::cerr << rec.dump() << '\n';
  std::error_code ec;
  if (!out_dir.empty() && fs::is_directory(out_dir, ec)) {
    std::ofstream os(fs::path(out_dir) / "error.json");
    if (os) os << rec.dump(2) << '\n';
  }
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Spectral solver, simulator and boundary-control harness for the heat equation with dynamic boundary conditions"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  app.add_option("--config", config_path, "flat key = value config file");
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker cap")->check(CLI::PositiveNumber);
  app.fallthrough();
  std::string command;
  for (const char* name : {"spectrum", "simulate", "control", "validate"}) {
    app.add_subcommand(name, std::string("run ") + name)->fallthrough()->callback([&command, name] { command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    error_record("UsageError", e.what(), "");
    return 2;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (out) cfg.out = *out;
    if (threads) cfg.threads = *threads;
    cfg.validate();
  } catch (const Error& e) {
    error_record(e.name(), e.what(), out.value_or(""));
    return 2;
  }

  try {
    if (command == "spectrum") return cmd_spectrum(cfg, cfg.out, std::cout);
    if (command == "simulate") return cmd_simulate(cfg, cfg.out, std::cout);
    if (command == "control") return cmd_control(cfg, cfg.out, std::cout);
    return cmd_validate(cfg, cfg.out, std::cout);
  } catch (const ConfigError& e) {
    error_record(e.name(), e.what(), cfg.out);
    return 2;
  } catch (const Error& e) {
    error_record(e.name(), e.what(), cfg.out);
    return 1;
  }
}

}  // namespace dynbc::cli
