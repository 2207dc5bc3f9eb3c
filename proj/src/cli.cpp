#include "shrink/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "shrink/errors.hpp"
#include "shrink/linmodel.hpp"
#include "shrink/minimax.hpp"

namespace shrink::cli {

Format parse_format(const std::string& s) {
  if (s == "json") return Format::Json;
  if (s == "csv") return Format::Csv;
  if (s == "table") return Format::Table;
  throw ValidationError("unknown format '" + s + "' (json, csv, table)");
}

const char* to_string(Format f) {
  switch (f) {
    case Format::Json: return "json";
    case Format::Csv: return "csv";
    case Format::Table: return "table";
  }
  return "json";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double to_double(const std::string& tok, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != tok.size()) {
    throw ValidationError(context + ": not a number: '" + tok + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream is(s);
  while (std::getline(is, tok, sep)) {
    const auto first = tok.find_first_not_of(" \t");
    const auto last = tok.find_last_not_of(" \t");
    out.push_back(first == std::string::npos ? "" : tok.substr(first, last - first + 1));
  }
  return out;
}

std::vector<double> grid_range(double lo, double hi, int points, bool log_scale) {
  if (points < 1) throw ValidationError("grid: need at least one point");
  if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    throw ValidationError("grid: need finite lo <= hi");
  }
  if (log_scale) {
    if (!(lo > 0.0)) throw ValidationError("grid: log spacing needs lo > 0");
    if (points == 1) return {lo};
    return log_grid(lo, hi, points);
  }
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    g[i] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
  }
  return g;
}

std::vector<double> grid_from_json(const Json& j) {
  if (j.is_array()) {
    std::vector<double> g;
    for (const auto& v : j) {
      if (!v.is_number()) throw ValidationError("grid: entries must be numbers");
      g.push_back(v.get<double>());
    }
    return g;
  }
  if (!j.is_object()) throw ValidationError("grid: expected a list or an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "lo" && key != "hi" && key != "points" && key != "scale") {
      throw ValidationError("grid: unknown field '" + key + "'");
    }
  }
  if (!j.contains("lo") || !j.contains("hi") || !j.contains("points")) {
    throw ValidationError("grid: need lo, hi and points");
  }
  if (!j.at("lo").is_number() || !j.at("hi").is_number() ||
      !j.at("points").is_number_integer()) {
    throw ValidationError("grid: lo, hi must be numbers and points an integer");
  }
  const std::string scale = j.value("scale", std::string("log"));
  if (scale != "log" && scale != "linear") {
    throw ValidationError("grid: scale must be 'log' or 'linear'");
  }
  return grid_range(j.at("lo").get<double>(), j.at("hi").get<double>(),
                    j.at("points").get<int>(), scale == "log");
}

bool bad_number(const Json& v) { return !v.is_number(); }

}  // namespace

RunConfig config_from_json(const Json& j, RunConfig cfg) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  static const std::set<std::string> known = {
      "hp", "input", "intercept", "grid", "model", "count", "seed",
      "sigma2", "spherical", "hypergeom", "format"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ValidationError("config: unknown field '" + key + "'");
  }
  if (j.contains("hp")) from_json(j.at("hp"), cfg.hp);
  if (j.contains("input")) {
    if (!j.at("input").is_string()) throw ValidationError("config: input must be a string");
    cfg.input = j.at("input").get<std::string>();
  }
  if (j.contains("intercept")) {
    if (!j.at("intercept").is_boolean()) throw ValidationError("config: intercept must be a boolean");
    cfg.intercept = j.at("intercept").get<bool>();
  }
  if (j.contains("grid")) cfg.grid = grid_from_json(j.at("grid"));
  if (j.contains("model")) risksim::from_json(j.at("model"), cfg.model);
  if (j.contains("count")) {
    if (!j.at("count").is_number_integer()) throw ValidationError("config: count must be an integer");
    cfg.count = j.at("count").get<std::int64_t>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) {
      throw ValidationError("config: seed must be a nonnegative integer");
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("sigma2")) {
    if (bad_number(j.at("sigma2"))) throw ValidationError("config: sigma2 must be a number");
    cfg.sigma2 = j.at("sigma2").get<double>();
  }
  if (j.contains("spherical")) {
    if (!j.at("spherical").is_boolean()) throw ValidationError("config: spherical must be a boolean");
    cfg.spherical = j.at("spherical").get<bool>();
  }
  if (j.contains("hypergeom")) hypergeom::from_json(j.at("hypergeom"), cfg.hypergeom);
  if (j.contains("format")) {
    if (!j.at("format").is_string()) throw ValidationError("config: format must be a string");
    cfg.format = parse_format(j.at("format").get<std::string>());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw IoError("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

Json config_to_json(const RunConfig& cfg) {
  Json j;
  j["hp"] = cfg.hp;
  j["input"] = cfg.input;
  j["intercept"] = cfg.intercept;
  j["grid"] = cfg.grid;
  j["model"] = cfg.model;
  j["count"] = cfg.count;
  j["seed"] = cfg.seed;
  j["sigma2"] = cfg.sigma2;
  j["spherical"] = cfg.spherical;
  j["hypergeom"] = cfg.hypergeom;
  return j;
}

std::vector<double> parse_grid_range(const std::string& spec, bool log_scale) {
  const auto parts = split(spec, ',');
  if (parts.size() != 3) throw ValidationError("grid range '" + spec + "': expected lo,hi,n");
  const double lo = to_double(parts[0], "grid range");
  const double hi = to_double(parts[1], "grid range");
  const double n = to_double(parts[2], "grid range");
  if (n != std::floor(n) || n < 1 || n > 1e7) {
    throw ValidationError("grid range '" + spec + "': n must be a positive integer");
  }
  return grid_range(lo, hi, static_cast<int>(n), log_scale);
}

std::vector<double> parse_list(const std::string& spec) {
  std::vector<double> out;
  for (const auto& tok : split(spec, ',')) out.push_back(to_double(tok, "list"));
  if (out.empty()) throw ValidationError("empty list");
  return out;
}

std::vector<double> default_theta_grid() {
  std::vector<double> g;
  for (int i = 0; i < 10; ++i) g.push_back(i);
  return g;
}

std::vector<double> default_z_grid() {
  std::vector<double> g;
  for (int i = 0; i < 10; ++i) g.push_back(0.05 + 0.1 * i);
  return g;
}

std::string format_real(double x, int digits) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

namespace {

std::string cell_text(const Cell& c, int digits) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_real(v, digits);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else {
          return std::to_string(v);
        }
      },
      c);
}

std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string render_csv(const Table& t) {
  std::string out;
  for (const auto& [key, val] : t.header_notes) {
    out += "# " + key + "=" + cell_text(val, 17) + "\n";
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    out += (i ? "," : "") + csv_field(t.columns[i]);
  }
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out += (i ? "," : "") + csv_field(cell_text(row[i], 17));
    }
    out += "\n";
  }
  return out;
}

std::string render_table(const Table& t) {
  std::string out;
  for (const auto& [key, val] : t.header_notes) {
    out += key + ": " + cell_text(val, 6) + "\n";
  }
  std::vector<std::vector<std::string>> text;
  text.push_back(t.columns);
  for (const auto& row : t.rows) {
    std::vector<std::string> r;
    for (const auto& c : row) r.push_back(cell_text(c, 6));
    text.push_back(std::move(r));
  }
  std::vector<std::size_t> width(t.columns.size(), 0);
  for (const auto& r : text) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], r[i].size());
    }
  }
  for (const auto& r : text) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) line += "  ";
      line += r[i];
      if (i + 1 < r.size()) line.append(width[i] - r[i].size(), ' ');
    }
    out += line + "\n";
  }
  return out;
}

std::string render(const Output& out, Format f) {
  switch (f) {
    case Format::Json: return out.json.dump(2) + "\n";
    case Format::Csv: return render_csv(out.table);
    case Format::Table: return render_table(out.table);
  }
  return {};
}

namespace {

Json real_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Cell optional_cell(const std::optional<double>& x) {
  return x ? Cell(*x) : Cell(std::string());
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace

Output cmd_estimate(const RunConfig& cfg) {
  if (cfg.input.empty()) throw ValidationError("estimate: --input is required");
  const auto data = linmodel::read_csv(cfg.input, cfg.intercept);
  const auto cf = linmodel::to_canonical(data);
  HyperParams hp = cfg.hp;
  hp.p = static_cast<int>(data.a_matrix.cols());
  hp.n = cf.n;
  validate(hp);
  const std::vector<double> x = to_std(cf.x);
  const Estimate est = estimate_with_diagnostics(hp, x, cf.s);
  const Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(
      est.theta.data(), static_cast<Eigen::Index>(est.theta.size()));
  const Eigen::VectorXd beta_shrink = linmodel::from_canonical(cf, theta);

  std::vector<std::string> names = data.column_names;
  if (names.size() != est.theta.size()) {
    names.clear();
    for (int i = 0; i < hp.p; ++i) names.push_back("x" + std::to_string(i + 1));
  }

  Output out;
  out.json = Json{{"hp", hp},
                  {"columns", names},
                  {"beta_ls", to_std(cf.beta_hat)},
                  {"beta_shrink", to_std(beta_shrink)},
                  {"x", x},
                  {"s", cf.s},
                  {"w", est.w},
                  {"phi", est.phi},
                  {"multiplier", est.multiplier},
                  {"method", to_string(est.method)}};
  out.table.header_notes = {{"w", est.w},
                            {"phi", est.phi},
                            {"multiplier", est.multiplier},
                            {"method", std::string(to_string(est.method))},
                            {"s", cf.s}};
  out.table.columns = {"column", "beta_ls", "beta_shrink"};
  for (std::size_t i = 0; i < names.size(); ++i) {
    out.table.rows.push_back({names[i], cf.beta_hat(static_cast<Eigen::Index>(i)),
                              beta_shrink(static_cast<Eigen::Index>(i))});
  }
  return out;
}

Output cmd_phi(const RunConfig& cfg) {
  const HyperParams& hp = cfg.hp;
  validate(hp);
  const std::vector<double> grid = cfg.grid.empty() ? standard_w_grid() : cfg.grid;
  const DerivedConstants dc = derived_constants(hp);

  Output out;
  out.json["hp"] = hp;
  out.json["constants"] = Json{{"alpha", real_or_null(dc.alpha)},
                               {"cc", dc.cc},
                               {"dd", dc.dd},
                               {"c_pn", dc.c_pn},
                               {"phi_slope_at_zero", phi_slope_at_zero(hp)}};
  out.json["rows"] = Json::array();
  out.table.columns = {"w", "phi", "dphi", "method", "phi_quadrature", "phi_hypergeom",
                       "difference"};
  for (double w : grid) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw ValidationError("phi: grid points must be positive and finite");
    }
    double hq = kNaN, hh = kNaN;
    try {
      hq = phi_quadrature(hp, w);
    } catch (const NumericalError&) {
    }
    try {
      hh = phi_hypergeom(hp, w);
    } catch (const NumericalError&) {
    }
    PhiEvaluation ev;
    if (std::isfinite(hh)) {
      ev = evaluate_phi(hp, w, PhiMethod::Hypergeom);
    } else if (std::isfinite(hq)) {
      ev = evaluate_phi(hp, w, PhiMethod::Quadrature);
    } else {
      throw NumericalError("phi: both methods failed at w = " + format_real(w));
    }
    const double diff = hh - hq;
    Json row = ev;
    row["phi_quadrature"] = real_or_null(hq);
    row["phi_hypergeom"] = real_or_null(hh);
    row["difference"] = real_or_null(diff);
    out.json["rows"].push_back(std::move(row));
    out.table.rows.push_back({ev.w, ev.phi, ev.dphi, std::string(to_string(ev.method)), hq,
                              hh, diff});
  }
  return out;
}

namespace {

void add_verdict(Output& out, const std::string& checker,
                 const std::optional<minimax::MinimaxVerdict>& v) {
  out.json["verdicts"][checker] = v ? Json(*v) : Json(nullptr);
  if (!v) return;
  out.table.rows.push_back({checker, std::string(v->certified ? "true" : "false"),
                            std::string(minimax::to_string(v->route)), v->constants.alpha,
                            v->constants.c_pn, optional_cell(v->constants.m1),
                            optional_cell(v->constants.m2), optional_cell(v->u_star),
                            optional_cell(v->a_star), optional_cell(v->scan_max),
                            v->details});
}

}  // namespace

Output cmd_check(const RunConfig& cfg) {
  Output out;
  out.table.columns = {"checker", "certified", "route", "alpha", "c_pn", "m1",
                       "m2", "u_star", "a_star", "scan_max", "details"};
  if (cfg.spherical) {
    const minimax::SphericalParams sp{cfg.hp.p, cfg.hp.n, cfg.hp.e, cfg.hp.a};
    minimax::validate(sp);
    const bool moment = risksim::check_moment_condition(cfg.model, sp.hyper());
    const auto v = minimax::check_spherical(sp, moment);
    out.json["spherical"] = sp;
    out.json["model"] = cfg.model;
    out.json["moment_condition"] = moment;
    out.table.header_notes = {{"model", cfg.model.name()},
                              {"moment_condition", std::string(moment ? "true" : "false")}};
    add_verdict(out, "spherical", v);
    out.json["certified"] = v.certified;
    out.json["route"] = minimax::to_string(v.route);
    return out;
  }

  const HyperParams& hp = cfg.hp;
  validate(hp);
  out.json["hp"] = hp;
  const auto main = minimax::check_main_theorem(hp);
  const auto mono = minimax::check_corollary_monotone(hp);
  std::optional<minimax::MinimaxVerdict> m1m2;
  if (hp.a < hp.half_n() + hp.e) {
    const auto bounds = phi_bounds(hp);
    if (bounds.m1 && bounds.m2) m1m2 = minimax::check_corollary_m1m2(hp);
  }
  const auto grid = standard_w_grid();
  const auto scan = minimax::certify_by_scan(hp, grid);

  add_verdict(out, "main_theorem", main);
  add_verdict(out, "corollary_monotone", mono);
  add_verdict(out, "corollary_m1m2", m1m2);
  add_verdict(out, "theorem21_scan", scan);

  minimax::Route route = minimax::Route::None;
  const minimax::MinimaxVerdict* order[] = {&main, &mono, m1m2 ? &*m1m2 : nullptr, &scan};
  for (const auto* v : order) {
    if (v && v->certified) {
      route = v->route;
      break;
    }
  }
  out.json["certified"] = route != minimax::Route::None;
  out.json["route"] = minimax::to_string(route);
  return out;
}

Output cmd_simulate(const RunConfig& cfg) {
  validate(cfg.hp);
  const std::vector<double> grid = cfg.grid.empty() ? default_theta_grid() : cfg.grid;
  RunConfig effective = cfg;
  effective.grid = grid;
  const Json config = config_to_json(effective);
  const std::string hash = hash_hex(config_hash(config));
  const bool moment = risksim::check_moment_condition(cfg.model, cfg.hp);
  const auto curve =
      risksim::dominance_curve(cfg.model, cfg.hp, grid, cfg.sigma2, cfg.count, cfg.seed);

  Output out;
  out.json = Json{{"config_hash", hash},
                  {"config", config},
                  {"moment_condition", moment},
                  {"curve", curve}};
  out.table.header_notes = {{"config_hash", hash}, {"seed", cfg.seed}};
  out.table.columns = {"theta_norm", "risk_phi", "se_phi", "risk_ls", "se_ls",
                       "n_samples", "seed"};
  for (const auto& pt : curve) {
    out.table.rows.push_back({pt.theta_norm, pt.risk.phi.mean, pt.risk.phi.std_error,
                              pt.risk.ls.mean, pt.risk.ls.std_error,
                              pt.risk.phi.n_samples, pt.risk.phi.seed});
  }
  return out;
}

namespace {

double identity_tolerance(const std::string& name) {
  return name == "euler_integral" ? 1e-8 : 1e-10;
}

}  // namespace

Output cmd_identities(const RunConfig& cfg) {
  const std::vector<double> z = cfg.grid.empty() ? default_z_grid() : cfg.grid;
  RunConfig effective = cfg;
  effective.grid = z;
  const Json config = config_to_json(effective);
  const std::string hash = hash_hex(config_hash(config));
  const auto residuals = hypergeom::identity_residuals(cfg.hypergeom, z);
  std::vector<risksim::IdentityCheck> stein;
  if (cfg.count > 0) {
    stein = risksim::check_stein_identities(cfg.count, cfg.seed, cfg.hp.p, cfg.hp.n,
                                            cfg.sigma2);
  }

  Output out;
  out.json = Json{{"config_hash", hash},
                  {"hypergeom", cfg.hypergeom},
                  {"z", z},
                  {"residuals", residuals},
                  {"stein", stein}};
  out.table.header_notes = {{"config_hash", hash}, {"seed", cfg.seed}};
  out.table.columns = {"group", "name", "residual", "std_error", "lhs", "rhs", "pass"};
  for (const auto& r : residuals) {
    const bool pass = r.failures.empty() && r.evaluated > 0 &&
                      r.max_residual < identity_tolerance(r.identity);
    out.table.rows.push_back({std::string("hypergeom"), r.identity, r.max_residual,
                              std::string(), std::string(), std::string(),
                              std::string(pass ? "true" : "false")});
  }
  for (const auto& c : stein) {
    out.table.rows.push_back({std::string("stein"), c.name, c.residual, c.std_error, c.lhs,
                              c.rhs, std::string(c.pass ? "true" : "false")});
  }
  return out;
}

std::string run(const std::string& subcommand, const RunConfig& cfg) {
  if (subcommand == "estimate") return render(cmd_estimate(cfg), cfg.format);
  if (subcommand == "phi") return render(cmd_phi(cfg), cfg.format);
  if (subcommand == "check") return render(cmd_check(cfg), cfg.format);
  if (subcommand == "simulate") return render(cmd_simulate(cfg), cfg.format);
  if (subcommand == "identities") return render(cmd_identities(cfg), cfg.format);
  throw ValidationError("unknown subcommand '" + subcommand + "'");
}

}  // namespace shrink::cli
