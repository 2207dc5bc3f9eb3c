#include "shrink/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "shrink/errors.hpp"

namespace shrink {
namespace {

void require_object(const Json& j, const char* what) {
  if (!j.is_object()) throw ValidationError(std::string(what) + ": expected a JSON object");
}

void reject_unknown(const Json& j, const char* what, std::set<std::string> known) {
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) {
      throw ValidationError(std::string(what) + ": unknown field '" + key + "'");
    }
  }
}

double get_real(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) throw ValidationError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

int get_int(const Json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) {
    throw ValidationError(std::string("field '") + key + "' must be an integer");
  }
  return v.get<int>();
}

Json optional_number(const std::optional<double>& x) {
  return x ? Json(*x) : Json(nullptr);
}

}  // namespace

void to_json(Json& j, const HyperParams& hp) {
  j = Json{{"p", hp.p}, {"n", hp.n}, {"a", hp.a}, {"b", hp.b}, {"e", hp.e}};
}

void from_json(const Json& j, HyperParams& hp) {
  require_object(j, "hp");
  reject_unknown(j, "hp", {"p", "n", "a", "b", "e"});
  hp.p = get_int(j, "p", hp.p);
  hp.n = get_int(j, "n", hp.n);
  hp.a = get_real(j, "a", hp.a);
  hp.b = get_real(j, "b", hp.b);
  hp.e = get_real(j, "e", hp.e);
}

void to_json(Json& j, const PhiEvaluation& ev) {
  j = Json{{"w", ev.w}, {"phi", ev.phi}, {"dphi", ev.dphi}, {"v", ev.v},
           {"method", to_string(ev.method)}};
}

void to_json(Json& j, const Estimate& est) {
  j = Json{{"theta", est.theta}, {"w", est.w}, {"phi", est.phi},
           {"multiplier", est.multiplier}, {"method", to_string(est.method)}};
}

namespace minimax {

void to_json(Json& j, const MinimaxVerdict& v) {
  j = Json{{"certified", v.certified},
           {"route", to_string(v.route)},
           {"alpha", v.constants.alpha},
           {"c_pn", v.constants.c_pn},
           {"m1", optional_number(v.constants.m1)},
           {"m2", optional_number(v.constants.m2)},
           {"u_star", optional_number(v.u_star)},
           {"a_star", optional_number(v.a_star)},
           {"scan_max", optional_number(v.scan_max)},
           {"details", v.details}};
}

void to_json(Json& j, const SphericalParams& sp) {
  j = Json{{"p", sp.p}, {"n", sp.n}, {"e", sp.e}, {"a", sp.a}, {"b", sp.b()}};
}

void from_json(const Json& j, SphericalParams& sp) {
  require_object(j, "spherical");
  reject_unknown(j, "spherical", {"p", "n", "e", "a", "b"});
  sp.p = get_int(j, "p", sp.p);
  sp.n = get_int(j, "n", sp.n);
  sp.e = get_real(j, "e", sp.e);
  sp.a = get_real(j, "a", sp.a);
  if (j.contains("b") && get_real(j, "b", 0.0) != sp.b()) {
    throw ValidationError("spherical: b must equal -a-2");
  }
}

}  // namespace minimax

namespace risksim {

void to_json(Json& j, const SphericalErrorModel& m) {
  j = Json{{"kind", to_string(m.kind)}};
  switch (m.kind) {
    case ErrorKind::StudentT: j["df"] = m.df; break;
    case ErrorKind::ContaminatedNormal:
      j["eps"] = m.eps;
      j["scale"] = m.scale;
      break;
    case ErrorKind::FixedRadius: j["radius"] = m.radius; break;
    case ErrorKind::Normal: break;
  }
}

void from_json(const Json& j, SphericalErrorModel& m) {
  if (j.is_string()) {
    m = parse_model(j.get<std::string>());
    return;
  }
  require_object(j, "model");
  if (!j.contains("kind") || !j.at("kind").is_string()) {
    throw ValidationError("model: missing string field 'kind'");
  }
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "normal") {
    reject_unknown(j, "model", {"kind"});
    m = SphericalErrorModel::normal();
  } else if (kind == "student_t") {
    reject_unknown(j, "model", {"kind", "df"});
    m = SphericalErrorModel::student_t(get_real(j, "df", 0.0));
  } else if (kind == "contaminated_normal") {
    reject_unknown(j, "model", {"kind", "eps", "scale"});
    m = SphericalErrorModel::contaminated_normal(get_real(j, "eps", -1.0),
                                                 get_real(j, "scale", 0.0));
  } else if (kind == "fixed_radius") {
    reject_unknown(j, "model", {"kind", "radius"});
    m = SphericalErrorModel::fixed_radius(get_real(j, "radius", 0.0));
  } else {
    throw ValidationError("model: unknown kind '" + kind + "'");
  }
  validate(m);
}

void to_json(Json& j, const RiskEstimate& r) {
  j = Json{{"mean", r.mean}, {"std_error", r.std_error}, {"n_samples", r.n_samples},
           {"seed", r.seed}};
}

void to_json(Json& j, const CurvePoint& pt) {
  j = Json{{"theta_norm", pt.theta_norm},
           {"phi", pt.risk.phi},
           {"ls", pt.risk.ls},
           {"difference", pt.risk.difference}};
}

void to_json(Json& j, const IdentityCheck& c) {
  j = Json{{"name", c.name},           {"lhs", c.lhs},
           {"rhs", c.rhs},             {"residual", c.residual},
           {"std_error", c.std_error}, {"pass", c.pass}};
}

SphericalErrorModel parse_model(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::string rest = spec.substr(colon + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      const auto comma = rest.find(',', pos);
      const std::string tok = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != tok.size()) {
        throw ValidationError("model: bad parameter '" + tok + "' in '" + spec + "'");
      }
      args.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  auto need = [&](std::size_t k) {
    if (args.size() != k) {
      throw ValidationError("model '" + kind + "' takes " + std::to_string(k) +
                            " parameter(s), got " + std::to_string(args.size()));
    }
  };
  SphericalErrorModel m;
  if (kind == "normal") {
    need(0);
    m = SphericalErrorModel::normal();
  } else if (kind == "student_t") {
    need(1);
    m = SphericalErrorModel::student_t(args[0]);
  } else if (kind == "contaminated_normal") {
    need(2);
    m = SphericalErrorModel::contaminated_normal(args[0], args[1]);
  } else if (kind == "fixed_radius") {
    need(1);
    m = SphericalErrorModel::fixed_radius(args[0]);
  } else {
    throw ValidationError("model: unknown kind '" + kind + "'");
  }
  validate(m);
  return m;
}

}  // namespace risksim

namespace hypergeom {

void to_json(Json& j, const HypergeomParams& hp) {
  j = Json{{"alpha", hp.alpha}, {"beta", hp.beta}, {"gamma", hp.gamma}};
}

void from_json(const Json& j, HypergeomParams& hp) {
  require_object(j, "hypergeom");
  reject_unknown(j, "hypergeom", {"alpha", "beta", "gamma"});
  hp.alpha = get_real(j, "alpha", hp.alpha);
  hp.beta = get_real(j, "beta", hp.beta);
  hp.gamma = get_real(j, "gamma", hp.gamma);
}

void to_json(Json& j, const IdentityResidual& r) {
  j = Json{{"identity", r.identity},   {"max_residual", r.max_residual},
           {"evaluated", r.evaluated}, {"skipped", r.skipped},
           {"failures", r.failures}};
}

}  // namespace hypergeom

std::uint64_t config_hash(const Json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace shrink
