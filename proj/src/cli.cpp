#include "neumann_layers/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "neumann_layers/asymptotics.hpp"
#include "neumann_layers/errors.hpp"
#include "neumann_layers/finite_p_solver.hpp"
#include "neumann_layers/green_basis.hpp"
#include "neumann_layers/json_output.hpp"
#include "neumann_layers/limit_solver.hpp"

namespace nlayers {

namespace {

// 1-based line of the first occurrence of "key" in the raw config text.
int line_of_key(const std::string& text, const std::string& key) {
  const std::size_t pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

std::string where(const RunConfig& cfg, const std::string& field) {
  auto it = cfg.origin.find(field);
  if (it != cfg.origin.end()) return it->second;
  return "default " + field;
}

[[noreturn]] void reject(const RunConfig& cfg, const std::string& field, const std::string& why) {
  throw UsageError(where(cfg, field) + ": " + why);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.14g", v);
  return buf;
}

}  // namespace

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& source) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Byte offset to line.
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n'));
    throw UsageError(source + ":" + std::to_string(line) + ": invalid JSON");
  }
  if (!doc.is_object()) throw UsageError(source + ":1: config must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    const std::string loc = source + ":" + std::to_string(line_of_key(text, key));
    auto need_number = [&] {
      if (!v.is_number()) throw UsageError(loc + ": key '" + key + "' must be a number");
      return v.get<double>();
    };
    auto need_integer = [&] {
      if (!v.is_number_integer()) throw UsageError(loc + ": key '" + key + "' must be an integer");
      return v.get<int>();
    };
    auto need_string = [&] {
      if (!v.is_string()) throw UsageError(loc + ": key '" + key + "' must be a string");
      return v.get<std::string>();
    };
    if (key == "N") {
      cfg.N = need_integer();
    } else if (key == "k") {
      cfg.k = need_integer();
    } else if (key == "p") {
      cfg.p.clear();
      if (v.is_array()) {
        for (const auto& x : v) {
          if (!x.is_number()) throw UsageError(loc + ": key 'p' must hold numbers");
          cfg.p.push_back(x.get<double>());
        }
      } else {
        cfg.p.push_back(need_number());
      }
    } else if (key == "a") {
      cfg.a = need_number();
    } else if (key == "b") {
      cfg.b = need_number();
    } else if (key == "rel_tol") {
      cfg.rel_tol = need_number();
    } else if (key == "abs_tol") {
      cfg.abs_tol = need_number();
    } else if (key == "out") {
      cfg.out = need_string();
    } else if (key == "format") {
      cfg.format = need_string();
    } else if (key == "check") {
      cfg.check = need_string();
    } else {
      throw UsageError(loc + ": unknown key '" + key + "'");
    }
    cfg.origin[key] = loc;
  }
}

void validate_config(const RunConfig& cfg) {
  if (cfg.N < 3) reject(cfg, "N", "N >= 3 required, got " + std::to_string(cfg.N));
  if (cfg.k < 1) reject(cfg, "k", "k >= 1 required, got " + std::to_string(cfg.k));
  if (!(cfg.a >= 0.0 && cfg.a < cfg.b && cfg.b <= 1.0))
    reject(cfg, cfg.origin.count("a") ? "a" : "b", "require 0 <= a < b <= 1");
  if (!(cfg.rel_tol > 0.0)) reject(cfg, "rel_tol", "tolerance must be positive");
  if (!(cfg.abs_tol > 0.0)) reject(cfg, "abs_tol", "tolerance must be positive");
  if (cfg.format != "csv" && cfg.format != "json") reject(cfg, "format", "format must be csv or json");
  for (double p : cfg.p)
    if (!(p > 1.0)) reject(cfg, "p", "p > 1 required, got " + short_num(p));
  if (cfg.command == "solve") {
    if (cfg.p.size() != 1) reject(cfg, "p", "solve needs a single exponent");
  }
  if (cfg.command == "validate") {
    for (std::size_t i = 1; i < cfg.p.size(); ++i)
      if (!(cfg.p[i] > cfg.p[i - 1])) reject(cfg, "p", "sweep must be sorted ascending");
    if (!cfg.check.empty()) {
      const auto& g = validation_groups();
      if (std::find(g.begin(), g.end(), cfg.check) == g.end()) reject(cfg, "check", "unknown check '" + cfg.check + "'");
    }
  }
  if ((cfg.command == "limit" || cfg.command == "solve") && cfg.k > 1 && (cfg.a != 0.0 || cfg.b != 1.0))
    reject(cfg, "k", "multi-layer runs use the unit ball");
}

std::string canonical_config(const RunConfig& cfg) {
  Json j;
  j["command"] = cfg.command;
  j["N"] = cfg.N;
  j["p"] = cfg.p;
  j["k"] = cfg.k;
  j["a"] = cfg.a;
  j["b"] = cfg.b;
  j["rel_tol"] = cfg.rel_tol;
  j["abs_tol"] = cfg.abs_tol;
  j["format"] = cfg.format;
  j["check"] = cfg.check;
  return dump_fixed(j, -1);
}

namespace {

struct Context {
  RunConfig cfg;
  IntegratorParams params;
  std::string hash;
  std::filesystem::path dir;
  std::ostream& out;
  std::ostream& err;
};

Json meta(const Context& ctx) {
  Json m;
  m["version"] = kLibraryVersion;
  m["config_hash"] = ctx.hash;
  m["config"] = Json::parse(canonical_config(ctx.cfg));
  return m;
}

std::string csv_header(const Context& ctx) {
  return std::string("# neumann_layers ") + kLibraryVersion + " config_hash=" + ctx.hash + "\n";
}

void write_file(const Context& ctx, const std::string& name, const std::string& body) {
  std::filesystem::create_directories(ctx.dir);
  std::ofstream f(ctx.dir / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (ctx.dir / name).string());
  f << body;
}

void write_json(const Context& ctx, const std::string& name, const Json& j) { write_file(ctx, name, dump_fixed(j) + "\n"); }

// ---------------------------------------------------------------------------

int cmd_basis(Context& ctx) {
  const int N = ctx.cfg.N;
  const GreenBasis basis = build_basis(N, ctx.params);
  const double r0 = 1e-4;
  const int n = 200;
  std::vector<double> rs, xs, dxs, zs, dzs;
  double wronskian = 0.0;
  bool xi_up = true, zeta_down = true;
  for (int i = 0; i <= n; ++i) {
    const double r = i == n ? 1.0 : r0 + (1.0 - r0) * i / n;
    const ValueSlope x = basis.xi(r), z = basis.zeta(r);
    wronskian = std::max(wronskian, std::abs(std::pow(r, N - 1) * (x.slope * z.value - x.value * z.slope) - 1.0));
    if (!xs.empty()) {
      xi_up = xi_up && x.value > xs.back();
      zeta_down = zeta_down && z.value < zs.back();
    }
    rs.push_back(r);
    xs.push_back(x.value);
    dxs.push_back(x.slope);
    zs.push_back(z.value);
    dzs.push_back(z.slope);
  }
  const double xi_origin = basis.xi(0.0).value;
  const double zeta_scaled = basis.zeta(r0).value * std::pow(r0, N - 2);
  const double zeta_end_slope = basis.zeta(1.0).slope;

  Json report = Json::array();
  auto add = [&](const std::string& name, double value, double reference, double tol, bool ok) {
    Json c;
    c["name"] = name;
    c["value"] = value;
    c["reference"] = reference;
    c["tolerance"] = tol;
    c["passed"] = ok;
    report.push_back(c);
  };
  add("wronskian", wronskian, 0.0, 1e-9, wronskian < 1e-9);
  add("xi increasing", xi_up ? 1.0 : 0.0, 1.0, 0.0, xi_up);
  add("zeta decreasing", zeta_down ? 1.0 : 0.0, 1.0, 0.0, zeta_down);
  add("xi at origin", xi_origin, 1.0 / (N - 2), 1e-12, std::abs(xi_origin - 1.0 / (N - 2)) < 1e-12);
  add("zeta r^(N-2) near origin", zeta_scaled, 1.0, 1e-3, std::abs(zeta_scaled - 1.0) < 1e-3);
  add("zeta slope at 1", zeta_end_slope, 0.0, 1e-9, std::abs(zeta_end_slope) < 1e-9);
  bool ok = true;
  for (const auto& c : report) ok = ok && c["passed"].get<bool>();

  if (ctx.cfg.format == "json") {
    Json j;
    j["meta"] = meta(ctx);
    j["representation"] = basis.representation() == BasisRepresentation::ClosedFormN3 ? "closed-form" : "tabulated";
    j["report"] = report;
    j["table"] = {{"r", rs}, {"xi", xs}, {"dxi", dxs}, {"zeta", zs}, {"dzeta", dzs}};
    write_json(ctx, "basis.json", j);
  } else {
    std::string csv = csv_header(ctx) + "r,xi,dxi,zeta,dzeta\n";
    for (std::size_t i = 0; i < rs.size(); ++i)
      csv += num(rs[i]) + "," + num(xs[i]) + "," + num(dxs[i]) + "," + num(zs[i]) + "," + num(dzs[i]) + "\n";
    write_file(ctx, "basis.csv", csv);
    std::string txt = csv_header(ctx);
    for (const auto& c : report)
      txt += std::string(c["passed"].get<bool>() ? "PASS " : "FAIL ") + c["name"].get<std::string>() + " " +
             num(c["value"].get<double>()) + "\n";
    write_file(ctx, "basis_report.txt", txt);
  }
  for (const auto& c : report)
    ctx.out << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>() << " "
            << short_num(c["value"].get<double>()) << "\n";
  return ok ? kExitOk : kExitInvariant;
}

int cmd_limit(Context& ctx) {
  const GreenBasis basis = build_basis(ctx.cfg.N, ctx.params);
  LimitLayerConfig config;
  LimitProfile profile;
  if (ctx.cfg.k == 1 && (ctx.cfg.a != 0.0 || ctx.cfg.b != 1.0)) {
    const AnnulusBasis ab = annulus_basis(basis, ctx.cfg.a, ctx.cfg.b);
    config.N = ctx.cfg.N;
    config.k = 1;
    config.beta = {ctx.cfg.a, ctx.cfg.b};
    config.alpha = {reflection_point(ab)};
    config.amplitude = {1.0 / green_eval(ab, config.alpha[0], config.alpha[0])};
    config.method = "reflection";
    const LimitOneLayer one = limit_1layer(ab, uniform_grid(ctx.cfg.a, ctx.cfg.b, 401));
    profile.grid = one.grid;
    profile.values = one.values;
    profile.piece.assign(one.grid.size(), 0);
  } else {
    config = solve_limit_config(basis, ctx.cfg.k);
    profile = assemble_limit_profile(basis, config, uniform_grid(0.0, 1.0, 401));
  }
  Json cj;
  cj["N"] = config.N;
  cj["k"] = config.k;
  cj["beta"] = config.beta;
  cj["alpha"] = config.alpha;
  cj["A"] = config.amplitude;
  cj["residuals"] = {{"M", config.residual_M},
                     {"phi", config.residual_phi},
                     {"junction", config.residual_junction},
                     {"amplitude", config.residual_amplitude},
                     {"profile_gap", profile.max_gap}};
  cj["method"] = config.method;
  cj["iterations"] = config.iterations;
  Json j;
  j["meta"] = meta(ctx);
  j["limit"] = cj;
  if (ctx.cfg.format == "json") {
    j["profile"] = {{"r", profile.grid}, {"u", profile.values}, {"piece_index", profile.piece}};
  } else {
    std::string csv = csv_header(ctx) + "r,u,piece_index\n";
    for (std::size_t i = 0; i < profile.grid.size(); ++i)
      csv += num(profile.grid[i]) + "," + num(profile.values[i]) + "," + std::to_string(profile.piece[i]) + "\n";
    write_file(ctx, "limit_profile.csv", csv);
  }
  write_json(ctx, "limit.json", j);
  for (int i = 0; i < config.k; ++i) ctx.out << "alpha_" << i + 1 << " = " << short_num(config.alpha[i]) << "\n";
  for (int i = 1; i < config.k; ++i) ctx.out << "beta_" << i << " = " << short_num(config.beta[i]) << "\n";
  ctx.out << "residual M = " << short_num(config.residual_M) << ", phi = " << short_num(config.residual_phi)
          << ", junction = " << short_num(config.residual_junction)
          << ", amplitude = " << short_num(config.residual_amplitude) << "\n";
  return kExitOk;
}

Json piece_json(const MonotoneSolution& s) {
  Json j;
  j["direction"] = to_string(s.direction);
  j["a"] = s.a;
  j["b"] = s.b;
  j["c"] = s.c;
  j["umax"] = s.umax;
  j["boundary_residual"] = s.boundary_residual;
  j["q_value"] = s.q_value;
  j["multiplicity"] = s.multiplicity;
  return j;
}

int cmd_solve(Context& ctx) {
  const double p = ctx.cfg.p.front();
  KLayerSolution sol;
  if (ctx.cfg.k == 1) {
    sol = solve_1layer(ctx.cfg.N, p, ctx.cfg.a, ctx.cfg.b, ctx.params);
  } else {
    sol = solve_klayer(ctx.cfg.N, p, ctx.cfg.k, ctx.params);
  }
  Json sj;
  sj["N"] = sol.N;
  sj["p"] = sol.p;
  sj["k"] = sol.k;
  sj["beta"] = sol.beta;
  sj["alpha"] = sol.alpha;
  sj["interior_maxima"] = sol.interior_maxima;
  sj["junction_jump"] = sol.junction_jump;
  sj["junction_slope"] = sol.junction_slope;
  sj["residual_M"] = sol.residual_M;
  sj["newton_iterations"] = sol.newton_iterations;
  sj["pieces"] = Json::array();
  for (const auto& piece : sol.pieces) sj["pieces"].push_back(piece_json(piece));
  Json j;
  j["meta"] = meta(ctx);
  j["solution"] = sj;
  if (ctx.cfg.format == "json") {
    Json prof = {{"r", Json::array()}, {"u", Json::array()}, {"du", Json::array()}, {"piece_index", Json::array()}};
    for (const auto& s : sol.profile) {
      prof["r"].push_back(s.r);
      prof["u"].push_back(s.u);
      prof["du"].push_back(s.du);
      prof["piece_index"].push_back(s.piece);
    }
    j["profile"] = prof;
  } else {
    std::string csv = csv_header(ctx) + "r,u,du,piece_index\n";
    for (const auto& s : sol.profile)
      csv += num(s.r) + "," + num(s.u) + "," + num(s.du) + "," + std::to_string(s.piece) + "\n";
    write_file(ctx, "solve_profile.csv", csv);
  }
  write_json(ctx, "solve.json", j);
  for (int i = 0; i < sol.k; ++i) ctx.out << "alpha_" << i + 1 << " = " << short_num(sol.alpha[i]) << "\n";
  ctx.out << "interior maxima = " << sol.interior_maxima << ", junction jump = " << short_num(sol.junction_jump)
          << ", junction slope = " << short_num(sol.junction_slope) << ", M residual = " << short_num(sol.residual_M)
          << "\n";
  const bool ok = sol.interior_maxima == sol.k && sol.junction_jump < 1e-7 && sol.junction_slope < 1e-8;
  return ok ? kExitOk : kExitInvariant;
}

int cmd_validate(Context& ctx) {
  ValidationOptions opts;
  if (!ctx.cfg.p.empty()) opts.sweep = ctx.cfg.p;
  opts.only = ctx.cfg.check;
  const ValidationReport rep = run_validation(ctx.cfg.N, ctx.cfg.a, ctx.cfg.b, opts, ctx.params);
  Json j;
  j["meta"] = meta(ctx);
  Json trend = Json::array();
  for (const auto& row : rep.trend) {
    trend.push_back({{"p", row.p},
                     {"ratio_error", row.ratio_error},
                     {"energy_error", row.energy_error},
                     {"blowup_error", row.blowup_error},
                     {"pohozaev", row.pohozaev},
                     {"eig_coarse", row.eig_coarse},
                     {"eig_fine", row.eig_fine}});
  }
  j["trend"] = trend;
  Json checks = Json::array();
  for (const auto& c : rep.checks) {
    checks.push_back({{"name", c.name},
                      {"value", c.value},
                      {"reference", c.reference},
                      {"tolerance", c.tolerance},
                      {"passed", c.passed},
                      {"provenance", c.provenance}});
  }
  j["checks"] = checks;
  j["passed"] = rep.passed();
  write_json(ctx, "validate.json", j);
  if (ctx.cfg.format == "csv") {
    std::string csv = csv_header(ctx) + "p,ratio_error,energy_error,blowup_error,pohozaev,eig_coarse,eig_fine\n";
    for (const auto& row : rep.trend)
      csv += num(row.p) + "," + num(row.ratio_error) + "," + num(row.energy_error) + "," + num(row.blowup_error) +
             "," + num(row.pohozaev) + "," + num(row.eig_coarse) + "," + num(row.eig_fine) + "\n";
    write_file(ctx, "validate_trend.csv", csv);
  }
  char line[256];
  std::snprintf(line, sizeof line, "%8s %12s %12s %12s %12s %12s\n", "p", "ratio_err", "energy_err", "blowup_err",
                "pohozaev", "min|eig|");
  ctx.out << line;
  for (const auto& row : rep.trend) {
    std::snprintf(line, sizeof line, "%8g %12.4e %12.4e %12.4e %12.4e %12.6g\n", row.p, row.ratio_error,
                  row.energy_error, row.blowup_error, row.pohozaev, row.eig_fine);
    ctx.out << line;
  }
  for (const auto& c : rep.checks)
    ctx.out << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << short_num(c.value)
            << " ref=" << short_num(c.reference) << "  [" << c.provenance << "]\n";
  return rep.passed() ? kExitOk : kExitInvariant;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Radial Neumann layer solutions of -Δu + u = u^p"};
  app.require_subcommand(1);
  struct Flags {
    int N = 3, k = 1;
    std::vector<double> p;
    double a = 0.0, b = 1.0, rel_tol = 1e-11, abs_tol = 1e-13;
    std::string out = ".", format = "csv", check, config;
  } flags;
  std::map<std::string, CLI::Option*> opts;
  std::vector<CLI::App*> subs;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"basis", "Tabulate the fundamental pair and check its invariants"},
      {"limit", "Solve the limit layer configuration"},
      {"solve", "Solve a finite-p layer solution"},
      {"validate", "Run the asymptotic validation suite over a p sweep"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    opts[name + "N"] = sub->add_option("--N", flags.N, "space dimension (>= 3)");
    opts[name + "p"] = sub->add_option("--p", flags.p, "exponent or comma-separated sweep")->delimiter(',');
    opts[name + "k"] = sub->add_option("--k", flags.k, "number of layers");
    opts[name + "a"] = sub->add_option("--a", flags.a, "inner radius");
    opts[name + "b"] = sub->add_option("--b", flags.b, "outer radius");
    opts[name + "rel_tol"] = sub->add_option("--rel-tol", flags.rel_tol, "integrator relative tolerance");
    opts[name + "abs_tol"] = sub->add_option("--abs-tol", flags.abs_tol, "integrator absolute tolerance");
    opts[name + "out"] = sub->add_option("--out", flags.out, "output directory");
    opts[name + "format"] = sub->add_option("--format", flags.format, "csv or json");
    opts[name + "check"] = sub->add_option("--check", flags.check, "single validation check group");
    opts[name + "config"] = sub->add_option("--config", flags.config, "JSON config file");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  RunConfig cfg;
  for (CLI::App* sub : subs)
    if (sub->parsed()) cfg.command = sub->get_name();
  auto given = [&](const std::string& field) { return opts[cfg.command + field]->count() > 0; };
  try {
    if (given("config")) {
      std::ifstream f(flags.config);
      if (!f) throw UsageError("--config: cannot read " + flags.config);
      std::stringstream text;
      text << f.rdbuf();
      apply_config_text(cfg, text.str(), flags.config);
    }
    auto take = [&](const std::string& field, auto& target, const auto& value, const std::string& flag) {
      if (!given(field)) return;
      target = value;
      cfg.origin[field] = flag;
    };
    take("N", cfg.N, flags.N, "--N");
    take("p", cfg.p, flags.p, "--p");
    take("k", cfg.k, flags.k, "--k");
    take("a", cfg.a, flags.a, "--a");
    take("b", cfg.b, flags.b, "--b");
    take("rel_tol", cfg.rel_tol, flags.rel_tol, "--rel-tol");
    take("abs_tol", cfg.abs_tol, flags.abs_tol, "--abs-tol");
    take("out", cfg.out, flags.out, "--out");
    take("format", cfg.format, flags.format, "--format");
    take("check", cfg.check, flags.check, "--check");
    if (cfg.command == "solve" && cfg.p.empty()) cfg.p = {100.0};
    validate_config(cfg);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  Context ctx{cfg, IntegratorParams{}, fnv1a_hex(canonical_config(cfg)), cfg.out, out, err};
  ctx.params.rel_tol = cfg.rel_tol;
  ctx.params.abs_tol = cfg.abs_tol;
  try {
    if (cfg.command == "basis") return cmd_basis(ctx);
    if (cfg.command == "limit") return cmd_limit(ctx);
    if (cfg.command == "solve") return cmd_solve(ctx);
    return cmd_validate(ctx);
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << "\n";
    if (e.kind() == ErrorKind::InvalidArgument) return kExitUsage;
    Json j;
    j["meta"] = meta(ctx);
    j["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
    try {
      write_json(ctx, cfg.command + "_error.json", j);
    } catch (const std::exception& io) {
      err << io.what() << "\n";
    }
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}

}  // namespace nlayers
