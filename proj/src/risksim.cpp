#include "shrink/risksim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include "shrink/errors.hpp"

namespace shrink::risksim {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Normal: return "normal";
    case ErrorKind::StudentT: return "student_t";
    case ErrorKind::ContaminatedNormal: return "contaminated_normal";
    case ErrorKind::FixedRadius: return "fixed_radius";
  }
  return "unknown";
}

SphericalErrorModel SphericalErrorModel::normal() {
  SphericalErrorModel m;
  m.kind = ErrorKind::Normal;
  m.moment_exponent_bound = std::numeric_limits<double>::infinity();
  return m;
}

SphericalErrorModel SphericalErrorModel::student_t(double df) {
  SphericalErrorModel m;
  m.kind = ErrorKind::StudentT;
  m.df = df;
  // |eps|^j has finite mean iff j < df.
  m.moment_exponent_bound = df;
  return m;
}

SphericalErrorModel SphericalErrorModel::contaminated_normal(double eps, double scale) {
  SphericalErrorModel m;
  m.kind = ErrorKind::ContaminatedNormal;
  m.eps = eps;
  m.scale = scale;
  m.moment_exponent_bound = std::numeric_limits<double>::infinity();
  return m;
}

SphericalErrorModel SphericalErrorModel::fixed_radius(double r) {
  SphericalErrorModel m;
  m.kind = ErrorKind::FixedRadius;
  m.radius = r;
  m.moment_exponent_bound = std::numeric_limits<double>::infinity();
  return m;
}

std::string SphericalErrorModel::name() const {
  std::ostringstream os;
  os << to_string(kind);
  switch (kind) {
    case ErrorKind::StudentT: os << "(" << df << ")"; break;
    case ErrorKind::ContaminatedNormal: os << "(" << eps << ", " << scale << ")"; break;
    case ErrorKind::FixedRadius: os << "(" << radius << ")"; break;
    case ErrorKind::Normal: break;
  }
  return os.str();
}

void validate(const SphericalErrorModel& m) {
  switch (m.kind) {
    case ErrorKind::Normal: return;
    case ErrorKind::StudentT:
      if (!(m.df > 0.0) || !std::isfinite(m.df)) {
        throw ValidationError("student_t: df must be positive and finite");
      }
      return;
    case ErrorKind::ContaminatedNormal:
      if (!(m.eps >= 0.0 && m.eps <= 1.0)) {
        throw ValidationError("contaminated_normal: eps must lie in [0, 1]");
      }
      if (!(m.scale > 0.0) || !std::isfinite(m.scale)) {
        throw ValidationError("contaminated_normal: scale must be positive");
      }
      return;
    case ErrorKind::FixedRadius:
      if (!(m.radius > 0.0) || !std::isfinite(m.radius)) {
        throw ValidationError("fixed_radius: radius must be positive");
      }
      return;
  }
  throw ValidationError("unknown error model");
}

void Stats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void Stats::merge(const Stats& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double na = static_cast<double>(n_), nb = static_cast<double>(o.n_);
  const double delta = o.mean_ - mean_;
  const double total = na + nb;
  mean_ += delta * nb / total;
  m2_ += o.m2_ + delta * delta * na * nb / total;
  n_ += o.n_;
}

double Stats::variance() const {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double Stats::std_error() const {
  return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

RiskEstimate Stats::estimate(std::uint64_t seed) const {
  return {mean_, std_error(), n_, seed};
}

int simulation_threads() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("SHRINK_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<int>(std::min<long>(v, 256));
  }
  return hw;
}

namespace {

using Rng = std::mt19937_64;

Rng block_rng(std::uint64_t seed, std::int64_t block) {
  const auto k = static_cast<std::uint64_t>(block);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  return Rng(seq);
}

// Runs fn(rng, draws, acc) for every block, spread over the workers by a
// fixed stride, and returns the per-block accumulators in block order.
template <class Acc, class Fn>
std::vector<Acc> run_blocks(std::int64_t count, std::uint64_t seed, const Acc& init,
                            Fn&& fn) {
  const std::int64_t blocks = (count + kBlockSize - 1) / kBlockSize;
  std::vector<Acc> out(static_cast<std::size_t>(blocks), init);
  const int workers =
      static_cast<int>(std::min<std::int64_t>(simulation_threads(), blocks));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));

  auto work = [&](int w) {
    try {
      for (std::int64_t k = w; k < blocks; k += workers) {
        Rng rng = block_rng(seed, k);
        const std::int64_t draws = std::min(kBlockSize, count - k * kBlockSize);
        fn(rng, draws, out[static_cast<std::size_t>(k)]);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };

  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

// Fills `out` with one error vector.
class ErrorDrawer {
 public:
  ErrorDrawer(const SphericalErrorModel& m, double sigma)
      : model_(m), sigma_(sigma) {
    if (m.kind == ErrorKind::StudentT) chi2_ = std::chi_squared_distribution<double>(m.df);
  }

  void draw(Rng& rng, std::span<double> out) {
    double norm2 = 0.0;
    for (double& v : out) {
      v = normal_(rng);
      norm2 += v * v;
    }
    double mult = sigma_;
    switch (model_.kind) {
      case ErrorKind::Normal:
        break;
      case ErrorKind::StudentT:
        mult /= std::sqrt(chi2_(rng) / model_.df);
        break;
      case ErrorKind::ContaminatedNormal:
        if (uniform_(rng) < model_.eps) mult *= model_.scale;
        break;
      case ErrorKind::FixedRadius:
        mult *= model_.radius / std::sqrt(norm2);
        break;
    }
    for (double& v : out) v *= mult;
  }

 private:
  SphericalErrorModel model_;
  double sigma_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::chi_squared_distribution<double> chi2_{1.0};
};

void check_sigma2(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw ValidationError("sigma2 must be positive and finite");
  }
}

}  // namespace

ErrorSamples sample_errors(const SphericalErrorModel& model, int p, int n,
                           double sigma2, std::int64_t count, std::uint64_t seed) {
  validate(model);
  check_sigma2(sigma2);
  if (p < 1 || n < 1) throw ValidationError("sample_errors: need p, n >= 1");
  if (count < 1) throw ValidationError("sample_errors: count must be at least 1");

  ErrorSamples out;
  out.p = p;
  out.n = n;
  out.count = count;
  const std::size_t dim = static_cast<std::size_t>(p + n);
  out.data.resize(static_cast<std::size_t>(count) * dim);
  const double sigma = std::sqrt(sigma2);

  const std::int64_t blocks = (count + kBlockSize - 1) / kBlockSize;
  // Same block layout and seeding as the risk engine.
  for (std::int64_t k = 0; k < blocks; ++k) {
    Rng rng = block_rng(seed, k);
    ErrorDrawer drawer(model, sigma);
    const std::int64_t draws = std::min(kBlockSize, count - k * kBlockSize);
    for (std::int64_t i = 0; i < draws; ++i) {
      const std::int64_t row = k * kBlockSize + i;
      drawer.draw(rng, {out.data.data() + static_cast<std::size_t>(row) * dim, dim});
    }
  }
  return out;
}

PhiTable::PhiTable(const HyperParams& hp, int nodes) : hp_(hp) {
  validate(hp);
  if (nodes < 16) throw ValidationError("PhiTable: need at least 16 nodes");
  log_lo_ = std::log(1e-8);
  log_hi_ = std::log(1e12);
  step_ = (log_hi_ - log_lo_) / (nodes - 1);
  slope0_ = phi_slope_at_zero(hp);
  value_.resize(static_cast<std::size_t>(nodes));
  dvalue_.resize(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) {
    const double w = std::exp(log_lo_ + step_ * i);
    const double phi = phi_hypergeom(hp, w);
    value_[static_cast<std::size_t>(i)] = phi;
    dvalue_[static_cast<std::size_t>(i)] = phi * phi_log_slope(hp, w);
  }
}

double PhiTable::operator()(double w) const {
  if (!(w > 0.0)) return 0.0;
  const double u = std::log(w);
  if (u <= log_lo_) return slope0_ * w;
  if (u >= log_hi_) return phi_with_fallback(hp_, w).phi;
  const double pos = (u - log_lo_) / step_;
  const auto i = std::min(static_cast<std::size_t>(pos), value_.size() - 2);
  const double t = pos - static_cast<double>(i);
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return h00 * value_[i] + h10 * step_ * dvalue_[i] + h01 * value_[i + 1] +
         h11 * step_ * dvalue_[i + 1];
}

PairedRisk paired_risk(const SphericalErrorModel& model, int n,
                       const PhiFunction& phi, std::span<const double> theta,
                       double sigma2, std::int64_t count, std::uint64_t seed) {
  validate(model);
  check_sigma2(sigma2);
  if (count < 10000) throw ValidationError("risk estimation needs count >= 1e4");
  const int p = static_cast<int>(theta.size());
  if (p < 1 || n < 1) throw ValidationError("paired_risk: need p, n >= 1");

  double theta2 = 0.0;
  for (double t : theta) theta2 += t * t;
  const double sigma = std::sqrt(sigma2);
  const std::size_t dim = static_cast<std::size_t>(p + n);

  struct Acc {
    Stats phi, ls, diff;
  };
  auto blocks = run_blocks(count, seed, Acc{}, [&](Rng& rng, std::int64_t draws, Acc& acc) {
    ErrorDrawer drawer(model, sigma);
    std::vector<double> eps(dim);
    for (std::int64_t i = 0; i < draws; ++i) {
      drawer.draw(rng, eps);
      double x2 = 0.0, xt = 0.0, e2 = 0.0, s = 0.0;
      for (int j = 0; j < p; ++j) {
        const double xj = theta[j] + eps[j];
        x2 += xj * xj;
        xt += xj * theta[j];
        e2 += eps[j] * eps[j];
      }
      for (std::size_t j = p; j < dim; ++j) s += eps[j] * eps[j];

      double loss_phi;
      if (x2 == 0.0) {
        loss_phi = theta2 / sigma2;  // estimate is the zero vector
      } else {
        const double w = x2 / s;
        const double m = 1.0 - phi(w) / w;
        loss_phi = (m * m * x2 - 2.0 * m * xt + theta2) / sigma2;
      }
      const double loss_ls = e2 / sigma2;
      acc.phi.add(loss_phi);
      acc.ls.add(loss_ls);
      acc.diff.add(loss_phi - loss_ls);
    }
  });

  Acc total;
  for (const auto& b : blocks) {
    total.phi.merge(b.phi);
    total.ls.merge(b.ls);
    total.diff.merge(b.diff);
  }
  return {total.phi.estimate(seed), total.ls.estimate(seed), total.diff.estimate(seed)};
}

RiskEstimate estimate_risk(const SphericalErrorModel& model, const HyperParams& hp,
                           std::span<const double> theta, double sigma2,
                           std::int64_t count, std::uint64_t seed) {
  if (theta.size() != static_cast<std::size_t>(hp.p)) {
    throw ValidationError("estimate_risk: theta must have p entries");
  }
  const PhiTable table(hp);
  return paired_risk(model, hp.n, std::cref(table), theta, sigma2, count, seed).phi;
}

std::vector<CurvePoint> dominance_curve(const SphericalErrorModel& model, int p,
                                        int n, const PhiFunction& phi,
                                        std::span<const double> theta_norms,
                                        double sigma2, std::int64_t count,
                                        std::uint64_t seed) {
  std::vector<CurvePoint> curve;
  curve.reserve(theta_norms.size());
  std::vector<double> theta(static_cast<std::size_t>(p), 0.0);
  for (double r : theta_norms) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw ValidationError("dominance_curve: theta norms must be finite and >= 0");
    }
    theta[0] = r;
    curve.push_back({r, paired_risk(model, n, phi, theta, sigma2, count, seed)});
  }
  return curve;
}

std::vector<CurvePoint> dominance_curve(const SphericalErrorModel& model,
                                        const HyperParams& hp,
                                        std::span<const double> theta_norms,
                                        double sigma2, std::int64_t count,
                                        std::uint64_t seed) {
  const PhiTable table(hp);
  return dominance_curve(model, hp.p, hp.n, std::cref(table), theta_norms, sigma2,
                         count, seed);
}

std::string curve_csv(std::span<const CurvePoint> curve) {
  std::string out = "theta_norm,risk_phi,se_phi,risk_ls,se_ls,n_samples,seed\n";
  char buf[512];
  for (const auto& pt : curve) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%lld,%llu\n",
                  pt.theta_norm, pt.risk.phi.mean, pt.risk.phi.std_error,
                  pt.risk.ls.mean, pt.risk.ls.std_error,
                  static_cast<long long>(pt.risk.phi.n_samples),
                  static_cast<unsigned long long>(pt.risk.phi.seed));
    out += buf;
  }
  return out;
}

bool check_moment_condition(const SphericalErrorModel& model, const HyperParams& hp) {
  validate(model);
  if (!model.moment_exponent_bound) {
    throw ValidationError("check_moment_condition: model " + model.name() +
                          " has no moment metadata");
  }
  // int t^k f(t) dt with k = (n+p)/2 - a + e equals, up to a constant,
  // E|eps|^j with j = 2k + 2 - (n+p) = 2(e - a + 1).
  const double k = 0.5 * (hp.n + hp.p) - hp.a + hp.e;
  const double j = 2.0 * (hp.e - hp.a + 1.0);
  if (model.kind != ErrorKind::FixedRadius && !(k > -1.0)) return false;
  return j < *model.moment_exponent_bound;
}

namespace {

struct SteinFunction {
  std::string name;
  // Fills lhs/rhs contributions for every coordinate.
  std::function<void(std::span<const double> x, std::span<const double> xc, double s,
                     double sigma2, std::span<double> lhs, std::span<double> rhs)>
      eval;
};

struct ChiFunction {
  std::string name;
  std::function<double(double)> g, dg;
};

std::vector<SteinFunction> stein_functions() {
  std::vector<SteinFunction> out;
  // x = X, xc = X - theta.
  out.push_back({"h_linear", [](auto x, auto xc, double, double sigma2, auto lhs, auto rhs) {
                   // h = X_1
                   for (std::size_t i = 0; i < x.size(); ++i) {
                     lhs[i] = xc[i] * x[0];
                     rhs[i] = i == 0 ? sigma2 : 0.0;
                   }
                 }});
  out.push_back({"h_cubic", [](auto x, auto xc, double, double sigma2, auto lhs, auto rhs) {
                   // h = X_1^2 X_2
                   const double h = x[0] * x[0] * x[1];
                   for (std::size_t i = 0; i < x.size(); ++i) {
                     lhs[i] = xc[i] * h;
                     double d = 0.0;
                     if (i == 0) d = 2.0 * x[0] * x[1];
                     if (i == 1) d = x[0] * x[0];
                     rhs[i] = sigma2 * d;
                   }
                 }});
  out.push_back({"h_rational", [](auto x, auto xc, double, double sigma2, auto lhs, auto rhs) {
                   // h = X_1 / (1 + |X|^2)
                   double r2 = 0.0;
                   for (double v : x) r2 += v * v;
                   const double q = 1.0 / (1.0 + r2);
                   const double h = x[0] * q;
                   for (std::size_t i = 0; i < x.size(); ++i) {
                     lhs[i] = xc[i] * h;
                     rhs[i] = sigma2 * ((i == 0 ? q : 0.0) - 2.0 * x[0] * x[i] * q * q);
                   }
                 }});
  out.push_back({"h_shrink", [](auto x, auto xc, double s, double sigma2, auto lhs, auto rhs) {
                   // h = X_1 S / (S + |X|^2), the shape of a shrinkage term
                   double r2 = 0.0;
                   for (double v : x) r2 += v * v;
                   const double q = 1.0 / (s + r2);
                   const double h = x[0] * s * q;
                   for (std::size_t i = 0; i < x.size(); ++i) {
                     lhs[i] = xc[i] * h;
                     rhs[i] = sigma2 * ((i == 0 ? s * q : 0.0) - 2.0 * x[0] * x[i] * s * q * q);
                   }
                 }});
  out.push_back({"h_radial", [](auto x, auto xc, double, double sigma2, auto lhs, auto rhs) {
                   // h = exp(-|X|^2 / 8)
                   double r2 = 0.0;
                   for (double v : x) r2 += v * v;
                   const double h = std::exp(-r2 / 8.0);
                   for (std::size_t i = 0; i < x.size(); ++i) {
                     lhs[i] = xc[i] * h;
                     rhs[i] = sigma2 * (-x[i] / 4.0) * h;
                   }
                 }});
  return out;
}

std::vector<ChiFunction> chi_functions() {
  return {
      {"g_one", [](double) { return 1.0; }, [](double) { return 0.0; }},
      {"g_identity", [](double s) { return s; }, [](double) { return 1.0; }},
      {"g_rational", [](double s) { return 1.0 / (1.0 + s); },
       [](double s) { return -1.0 / ((1.0 + s) * (1.0 + s)); }},
      {"g_exp", [](double s) { return std::exp(-s / 10.0); },
       [](double s) { return -std::exp(-s / 10.0) / 10.0; }},
      {"g_log", [](double s) { return std::log1p(s); }, [](double s) { return 1.0 / (1.0 + s); }},
  };
}

}  // namespace

std::vector<std::string> stein_library() {
  std::vector<std::string> names;
  for (const auto& f : stein_functions()) names.push_back(f.name);
  for (const auto& g : chi_functions()) names.push_back(g.name);
  return names;
}

std::vector<IdentityCheck> check_stein_identities(std::int64_t count,
                                                  std::uint64_t seed, int p, int n,
                                                  double sigma2,
                                                  std::span<const std::string> names) {
  check_sigma2(sigma2);
  if (p < 2 || n < 1) throw ValidationError("check_stein_identities: need p >= 2, n >= 1");
  if (count < 2) throw ValidationError("check_stein_identities: count must be at least 2");

  auto selected = [&](const std::string& name) {
    return names.empty() || std::find(names.begin(), names.end(), name) != names.end();
  };
  std::vector<SteinFunction> hs;
  for (auto& f : stein_functions()) {
    if (selected(f.name)) hs.push_back(std::move(f));
  }
  std::vector<ChiFunction> gs;
  for (auto& g : chi_functions()) {
    if (selected(g.name)) gs.push_back(std::move(g));
  }
  for (const auto& name : names) {
    const auto lib = stein_library();
    if (std::find(lib.begin(), lib.end(), name) == lib.end()) {
      throw ValidationError("check_stein_identities: unknown test function '" + name + "'");
    }
  }

  // A fixed, non-central mean so that the identities are not checked only
  // at the symmetric point.
  std::vector<double> theta(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) theta[i] = 0.3 * (i + 1) * (i % 2 == 0 ? 1.0 : -1.0);

  const std::size_t n_checks = hs.size() * static_cast<std::size_t>(p) + gs.size();
  struct Acc {
    std::vector<Stats> lhs, rhs, diff;
  };
  Acc init{std::vector<Stats>(n_checks), std::vector<Stats>(n_checks),
           std::vector<Stats>(n_checks)};
  const double sigma = std::sqrt(sigma2);
  const auto model = SphericalErrorModel::normal();
  const std::size_t dim = static_cast<std::size_t>(p + n);

  auto blocks = run_blocks(count, seed, init, [&](Rng& rng, std::int64_t draws, Acc& acc) {
    ErrorDrawer drawer(model, sigma);
    std::vector<double> eps(dim), x(static_cast<std::size_t>(p));
    std::vector<double> lhs(static_cast<std::size_t>(p)), rhs(static_cast<std::size_t>(p));
    for (std::int64_t k = 0; k < draws; ++k) {
      drawer.draw(rng, eps);
      for (int i = 0; i < p; ++i) x[i] = theta[i] + eps[i];
      double s = 0.0;
      for (std::size_t j = p; j < dim; ++j) s += eps[j] * eps[j];
      const std::span<const double> xc(eps.data(), static_cast<std::size_t>(p));

      std::size_t c = 0;
      for (const auto& h : hs) {
        h.eval(x, xc, s, sigma2, lhs, rhs);
        for (int i = 0; i < p; ++i, ++c) {
          acc.lhs[c].add(lhs[i]);
          acc.rhs[c].add(rhs[i]);
          acc.diff[c].add(lhs[i] - rhs[i]);
        }
      }
      for (const auto& g : gs) {
        const double l = s * g.g(s);
        const double r = sigma2 * (n * g.g(s) + 2.0 * s * g.dg(s));
        acc.lhs[c].add(l);
        acc.rhs[c].add(r);
        acc.diff[c].add(l - r);
        ++c;
      }
    }
  });

  Acc total = init;
  for (const auto& b : blocks) {
    for (std::size_t c = 0; c < n_checks; ++c) {
      total.lhs[c].merge(b.lhs[c]);
      total.rhs[c].merge(b.rhs[c]);
      total.diff[c].merge(b.diff[c]);
    }
  }

  std::vector<IdentityCheck> out;
  std::size_t c = 0;
  auto emit = [&](std::string name) {
    IdentityCheck chk;
    chk.name = std::move(name);
    chk.lhs = total.lhs[c].mean();
    chk.rhs = total.rhs[c].mean();
    chk.residual = total.diff[c].mean();
    chk.std_error = total.diff[c].std_error();
    chk.pass = std::abs(chk.residual) <= 4.0 * chk.std_error;
    out.push_back(std::move(chk));
    ++c;
  };
  for (const auto& h : hs) {
    for (int i = 0; i < p; ++i) emit("stein:" + h.name + ":x" + std::to_string(i + 1));
  }
  for (const auto& g : gs) emit("chi2:" + g.name);
  return out;
}

}  // namespace shrink::risksim
