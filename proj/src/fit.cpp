#include "hsps/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "hsps/errors.hpp"

namespace hsps {

namespace {

constexpr int kRate = 0, kBandwidth = 1, kTauD = 2;

struct Transform {
  // rate and bandwidth fit in log10, tau_d in nanoseconds.
  static double to_x(int param, double v) {
    return param == kTauD ? v * 1e9 : std::log10(v);
  }
  static double to_param(int param, double x) {
    return param == kTauD ? x * 1e-9 : std::pow(10.0, x);
  }
  static double jacobian(int param, double v) {
    return param == kTauD ? 1e-9 : v * std::numbers::ln10;
  }
};

struct Objective {
  const FitProblem* problem;
  std::array<double, 3> fixed;
  std::vector<int> active;  // parameter ids of free dimensions
  mutable long evaluations = 0;

  std::array<double, 3> params_from(const std::vector<double>& x) const {
    std::array<double, 3> p = fixed;
    for (std::size_t i = 0; i < active.size(); ++i)
      p[active[i]] = Transform::to_param(active[i], x[i]);
    return p;
  }

  double chi2(const std::array<double, 3>& p) const {
    ++evaluations;
    double total = 0.0;
    try {
      for (const auto& curve : problem->gsi_curves) {
        const SpdcParams src =
            SpdcParams::from_pump(p[kRate], curve.pump_mw, p[kBandwidth]);
        DetectorModel det;
        det.jitter_halfwidth = p[kTauD];
        const CoincidenceConfig win{curve.tau_coin};
        const ResponseModel model(src, det, win, EvalMode::delta);
        for (const auto& pt : curve.points) {
          const double f = model.g2bar_si(pt.tau);
          const double r = (pt.value - f) / pt.sigma;
          total += r * r;
        }
      }
      for (const auto& pt : problem->gc0_points) {
        const SpdcParams src =
            SpdcParams::from_pump(p[kRate], pt.pump_mw, p[kBandwidth]);
        DetectorModel det;
        det.jitter_halfwidth = p[kTauD];
        const CoincidenceConfig win{pt.tau_coin};
        const double f = ResponseModel(src, det, win, EvalMode::delta).g2bar_c(0.0);
        const double r = (pt.value - f) / pt.sigma;
        total += r * r;
      }
    } catch (const ConfigError&) {
      // Grid corner outside the low-gain regime; steer the search away.
      return std::numeric_limits<double>::infinity();
    }
    return total;
  }

  double operator()(const std::vector<double>& x) const {
    return chi2(params_from(x));
  }
};

struct Bounds {
  std::vector<double> lo, hi;
  void clamp(std::vector<double>& x) const {
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = std::min(hi[i], std::max(lo[i], x[i]));
  }
};

struct NmResult {
  std::vector<double> x;
  double fx = std::numeric_limits<double>::infinity();
  long iterations = 0;
};

// Standard Nelder-Mead with bound clamping; the incumbent best never
// worsens, checked each iteration.
NmResult nelder_mead(const Objective& f, const Bounds& b,
                     std::vector<double> x0, double tol, long max_iter) {
  const std::size_t n = x0.size();
  b.clamp(x0);
  std::vector<std::vector<double>> xs(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) {
    double step = 0.25;
    if (xs[i + 1][i] + step > b.hi[i]) step = -0.25;
    xs[i + 1][i] += step;
    b.clamp(xs[i + 1]);
  }
  std::vector<double> fs(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fs[i] = f(xs[i]);

  NmResult best;
  auto order = [&] {
    std::vector<std::size_t> idx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t c) { return fs[a] < fs[c]; });
    std::vector<std::vector<double>> xs2;
    std::vector<double> fs2;
    for (auto i : idx) {
      xs2.push_back(xs[i]);
      fs2.push_back(fs[i]);
    }
    xs.swap(xs2);
    fs.swap(fs2);
  };

  order();
  double incumbent = fs[0];
  for (long it = 0; it < max_iter; ++it) {
    best.iterations = it;
    if (fs[0] > incumbent + 1e-12 * (1.0 + std::abs(incumbent)))
      throw FitError("fit: refinement chi2 increased; numerical failure");
    incumbent = std::min(incumbent, fs[0]);

    double spread = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 1; j <= n; ++j)
        spread = std::max(spread, std::abs(xs[j][i] - xs[0][i]));
    if (spread < tol) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) centroid[i] += xs[j][i];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);

    auto blend = [&](double coef) {
      std::vector<double> x(n);
      for (std::size_t i = 0; i < n; ++i)
        x[i] = centroid[i] + coef * (centroid[i] - xs[n][i]);
      b.clamp(x);
      return x;
    };

    const auto xr = blend(1.0);
    const double fr = f(xr);
    if (fr < fs[0]) {
      const auto xe = blend(2.0);
      const double fe = f(xe);
      if (fe < fr) {
        xs[n] = xe;
        fs[n] = fe;
      } else {
        xs[n] = xr;
        fs[n] = fr;
      }
    } else if (fr < fs[n - 1]) {
      xs[n] = xr;
      fs[n] = fr;
    } else {
      const auto xc = blend(fr < fs[n] ? 0.5 : -0.5);
      const double fc = f(xc);
      if (fc < std::min(fr, fs[n])) {
        xs[n] = xc;
        fs[n] = fc;
      } else {
        for (std::size_t j = 1; j <= n; ++j) {
          for (std::size_t i = 0; i < n; ++i)
            xs[j][i] = xs[0][i] + 0.5 * (xs[j][i] - xs[0][i]);
          fs[j] = f(xs[j]);
        }
      }
    }
    order();
  }
  best.x = xs[0];
  best.fx = fs[0];
  return best;
}

// Jacobi eigenvalue iteration for small symmetric matrices.
void jacobi_eigen(std::vector<std::vector<double>> a,
                  std::vector<double>& values,
                  std::vector<std::vector<double>>& vectors) {
  const std::size_t n = a.size();
  vectors.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) vectors[i][i] = 1.0;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vectors[k][p], vkq = vectors[k][q];
          vectors[k][p] = c * vkp - s * vkq;
          vectors[k][q] = s * vkp + c * vkq;
        }
      }
  }
  values.resize(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a[i][i];
}

const char* param_name(int id) {
  switch (id) {
    case kRate: return "rate_per_mw";
    case kBandwidth: return "bandwidth";
    default: return "tau_d";
  }
}

}  // namespace

void FitProblem::validate() const {
  std::set<double> powers, windows;
  std::size_t points = 0;
  for (const auto& c : gsi_curves) {
    if (!(c.pump_mw > 0.0)) throw FitError("FitProblem: pump power <= 0");
    if (!(c.tau_coin > 0.0)) throw FitError("FitProblem: tau_coin <= 0");
    powers.insert(c.pump_mw);
    windows.insert(c.tau_coin);
    points += c.points.size();
    for (const auto& p : c.points)
      if (!(p.sigma > 0.0)) throw FitError("FitProblem: nonpositive sigma");
  }
  for (const auto& p : gc0_points) {
    if (!(p.pump_mw > 0.0)) throw FitError("FitProblem: pump power <= 0");
    if (!(p.tau_coin > 0.0)) throw FitError("FitProblem: tau_coin <= 0");
    if (!(p.sigma > 0.0)) throw FitError("FitProblem: nonpositive sigma");
    powers.insert(p.pump_mw);
    windows.insert(p.tau_coin);
    ++points;
  }
  const std::size_t datasets = gsi_curves.size() + gc0_points.size();
  if (datasets == 0) throw FitError("FitProblem: no datasets");
  if (datasets < 2 || (powers.size() < 2 && windows.size() < 2))
    throw FitError(
        "FitProblem: not identifiable; need >= 2 datasets at distinct pump "
        "powers or distinct coincidence windows");
  std::size_t free = 0;
  for (const ParamSpec* s : {&rate_per_mw, &bandwidth, &tau_d})
    free += s->free ? 1 : 0;
  if (free == 0) throw FitError("FitProblem: no free parameters");
  if (points <= free)
    throw FitError("FitProblem: fewer data points than free parameters");
}

FitResult fit(const FitProblem& problem) {
  problem.validate();

  Objective obj;
  obj.problem = &problem;
  obj.fixed = {problem.rate_per_mw.value, problem.bandwidth.value,
               problem.tau_d.value};
  const std::array<const ParamSpec*, 3> specs = {
      &problem.rate_per_mw, &problem.bandwidth, &problem.tau_d};
  for (int id = 0; id < 3; ++id)
    if (specs[id]->free) obj.active.push_back(id);
  const std::size_t n = obj.active.size();

  Bounds bounds;
  for (int id : obj.active) {
    bounds.lo.push_back(Transform::to_x(
        id, id == kTauD ? specs[id]->lo : std::max(specs[id]->lo, 1e-300)));
    bounds.hi.push_back(Transform::to_x(id, specs[id]->hi));
  }

  // 8 points per free dimension: log-spaced, except tau_d which admits 0.
  std::vector<std::vector<double>> grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int id = obj.active[i];
    const int kPts = 8;
    if (id == kTauD) {
      grid[i].push_back(Transform::to_x(id, specs[id]->lo));
      const double hi = specs[id]->hi;
      for (int j = 0; j < kPts - 1; ++j)
        grid[i].push_back(Transform::to_x(
            id, hi * std::pow(10.0, -3.0 * (1.0 - j / double(kPts - 2)))));
    } else {
      const double llo = std::log10(std::max(specs[id]->lo, 1e-300));
      const double lhi = std::log10(specs[id]->hi);
      for (int j = 0; j < kPts; ++j)
        grid[i].push_back(llo + (lhi - llo) * j / double(kPts - 1));
    }
  }

  struct Start {
    std::vector<double> x;
    double fx;
    long index;
  };
  std::vector<Start> starts;
  std::vector<std::size_t> digit(n, 0);
  long index = 0;
  while (true) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = grid[i][digit[i]];
    starts.push_back({x, obj(x), index++});
    std::size_t d = 0;
    while (d < n && ++digit[d] == grid[d].size()) digit[d++] = 0;
    if (d == n) break;
  }
  std::stable_sort(starts.begin(), starts.end(), [](const Start& a, const Start& b) {
    return a.fx != b.fx ? a.fx < b.fx : a.index < b.index;
  });

  const std::size_t n_refine = std::min<std::size_t>(starts.size(), 8);
  NmResult best;
  long best_start = -1;
  for (std::size_t s = 0; s < n_refine; ++s) {
    if (!std::isfinite(starts[s].fx)) continue;
    NmResult r = nelder_mead(obj, bounds, starts[s].x, 4e-5, 500);
    if (r.fx < best.fx) {
      best = r;
      best_start = starts[s].index;
    }
  }
  if (best_start < 0) throw FitError("fit: no feasible starting point");

  // Curvature at the optimum (finite differences in transformed space).
  const double h = 1e-3;
  std::vector<std::vector<double>> hess(n, std::vector<double>(n, 0.0));
  const double f0 = obj(best.x);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      auto probe = [&](double si, double sj) {
        std::vector<double> x = best.x;
        x[i] += si * h;
        x[j] += sj * h;
        return obj(x);
      };
      double second;
      if (i == j) {
        second = (probe(1, 0) - 2.0 * f0 + probe(-1, 0)) / (h * h);
      } else {
        second = (probe(1, 1) - probe(1, -1) - probe(-1, 1) + probe(-1, -1)) /
                 (4.0 * h * h);
      }
      hess[i][j] = hess[j][i] = second;
    }
  }

  std::vector<double> eval;
  std::vector<std::vector<double>> evec;
  jacobi_eigen(hess, eval, evec);
  double emax = 0.0, emin = std::numeric_limits<double>::infinity();
  std::size_t imin = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::abs(eval[i]);
    emax = std::max(emax, a);
    if (a < emin) {
      emin = a;
      imin = i;
    }
  }
  if (!(emin > 0.0) || emax / emin > 1e8) {
    std::size_t dominant = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(evec[i][imin]) > std::abs(evec[dominant][imin]))
        dominant = i;
    throw FitError(std::string("fit: not identifiable; flat chi2 direction "
                               "dominated by ") +
                   param_name(obj.active[dominant]));
  }

  // Covariance = 2 H^-1 via the eigendecomposition.
  std::vector<std::vector<double>> cov_x(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        cov_x[i][j] += evec[i][k] * evec[j][k] * (2.0 / eval[k]);

  FitResult out;
  const auto p = obj.params_from(best.x);
  out.rate_per_mw = p[kRate];
  out.bandwidth = p[kBandwidth];
  out.tau_d = p[kTauD];
  out.chi2 = best.fx;
  long points = 0;
  for (const auto& c : problem.gsi_curves)
    points += static_cast<long>(c.points.size());
  points += static_cast<long>(problem.gc0_points.size());
  out.dof = points - static_cast<long>(n);
  out.starts = static_cast<long>(starts.size());
  out.evaluations = obj.evaluations;

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const int pi = obj.active[i];
      const int pj = obj.active[j];
      out.covariance[pi][pj] = cov_x[i][j] *
                               Transform::jacobian(pi, p[pi]) *
                               Transform::jacobian(pj, p[pj]);
    }
  out.rate_per_mw_sigma = std::sqrt(std::max(0.0, out.covariance[kRate][kRate]));
  out.bandwidth_sigma =
      std::sqrt(std::max(0.0, out.covariance[kBandwidth][kBandwidth]));
  out.tau_d_sigma = std::sqrt(std::max(0.0, out.covariance[kTauD][kTauD]));

  double ref_power = problem.reference_power_mw;
  if (ref_power <= 0.0) {
    for (const auto& c : problem.gsi_curves)
      ref_power = std::max(ref_power, c.pump_mw);
    for (const auto& c : problem.gc0_points)
      ref_power = std::max(ref_power, c.pump_mw);
  }
  out.reference_power_mw = ref_power;
  out.reference_rate = out.rate_per_mw * ref_power;
  std::array<std::array<double, 2>, 2> cov_rb{};
  cov_rb[0][0] = out.covariance[kRate][kRate] * ref_power * ref_power;
  cov_rb[0][1] = cov_rb[1][0] = out.covariance[kRate][kBandwidth] * ref_power;
  cov_rb[1][1] = out.covariance[kBandwidth][kBandwidth];
  const auto inferred = infer_true_g2c0(out.reference_rate, out.bandwidth, cov_rb);
  out.g2c0 = inferred.first;
  out.g2c0_sigma = inferred.second;
  return out;
}

std::pair<double, double> infer_true_g2c0(
    double pair_rate, double bandwidth,
    const std::array<std::array<double, 2>, 2>& cov) {
  if (pair_rate == 0.0) return {0.0, 0.0};
  const SpdcParams p = SpdcParams::from_rate(pair_rate, bandwidth);
  const double value = g2_cond_at_zero(p);
  const double gsi0 = 1.0 + bandwidth / pair_rate;
  // d/dx of (2/x)(2 - 1/x)
  const double dg_dgsi = -4.0 / (gsi0 * gsi0) + 4.0 / (gsi0 * gsi0 * gsi0);
  const double dgsi_dr = -bandwidth / (pair_rate * pair_rate);
  const double dgsi_db = 1.0 / pair_rate;
  const double dr = dg_dgsi * dgsi_dr;
  const double db = dg_dgsi * dgsi_db;
  const double var = dr * dr * cov[0][0] + db * db * cov[1][1] +
                     2.0 * dr * db * cov[0][1];
  return {value, std::sqrt(std::max(0.0, var))};
}

namespace {

using nlohmann::ordered_json;

void require_keys(const ordered_json& j,
                  std::initializer_list<const char*> allowed,
                  const std::string& ctx) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok)
      throw ConfigError("unknown key '" + it.key() + "' in " + ctx);
  }
}

ordered_json spec_to_json(const ParamSpec& s) {
  return ordered_json{{"free", s.free}, {"value", s.value}, {"lo", s.lo},
                      {"hi", s.hi}};
}

ParamSpec spec_from_json(const ordered_json& j, const std::string& ctx) {
  require_keys(j, {"free", "value", "lo", "hi"}, ctx);
  ParamSpec s;
  s.free = j.at("free").get<bool>();
  s.value = j.at("value").get<double>();
  s.lo = j.at("lo").get<double>();
  s.hi = j.at("hi").get<double>();
  return s;
}

}  // namespace

std::string fit_problem_to_json(const FitProblem& p) {
  ordered_json j;
  j["schema"] = "hsps-fit-problem/1";
  j["rate_per_mw"] = spec_to_json(p.rate_per_mw);
  j["bandwidth"] = spec_to_json(p.bandwidth);
  j["tau_d"] = spec_to_json(p.tau_d);
  j["reference_power_mw"] = p.reference_power_mw;
  j["gsi_curves"] = ordered_json::array();
  for (const auto& c : p.gsi_curves) {
    ordered_json jc;
    jc["pump_mw"] = c.pump_mw;
    jc["tau_coin_s"] = c.tau_coin;
    ordered_json pts = ordered_json::array();
    for (const auto& pt : c.points)
      pts.push_back({pt.tau, pt.value, pt.sigma});
    jc["points"] = std::move(pts);
    j["gsi_curves"].push_back(std::move(jc));
  }
  j["gc0_points"] = ordered_json::array();
  for (const auto& c : p.gc0_points)
    j["gc0_points"].push_back({{"pump_mw", c.pump_mw},
                               {"tau_coin_s", c.tau_coin},
                               {"value", c.value},
                               {"sigma", c.sigma}});
  return j.dump(2);
}

FitProblem fit_problem_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("fit problem JSON parse error: ") + e.what());
  }
  require_keys(j,
               {"schema", "rate_per_mw", "bandwidth", "tau_d",
                "reference_power_mw", "gsi_curves", "gc0_points"},
               "fit problem");
  if (j.at("schema").get<std::string>() != "hsps-fit-problem/1")
    throw ConfigError("fit problem: unsupported schema");
  FitProblem p;
  if (j.contains("rate_per_mw"))
    p.rate_per_mw = spec_from_json(j["rate_per_mw"], "rate_per_mw");
  if (j.contains("bandwidth"))
    p.bandwidth = spec_from_json(j["bandwidth"], "bandwidth");
  if (j.contains("tau_d")) p.tau_d = spec_from_json(j["tau_d"], "tau_d");
  if (j.contains("reference_power_mw"))
    p.reference_power_mw = j["reference_power_mw"].get<double>();
  if (j.contains("gsi_curves"))
    for (const auto& jc : j["gsi_curves"]) {
      require_keys(jc, {"pump_mw", "tau_coin_s", "points"}, "gsi curve");
      GsiCurveData c;
      c.pump_mw = jc.at("pump_mw").get<double>();
      c.tau_coin = jc.at("tau_coin_s").get<double>();
      for (const auto& row : jc.at("points")) {
        if (!row.is_array() || row.size() != 3)
          throw ConfigError("gsi curve points must be [tau, value, sigma]");
        c.points.push_back({row[0].get<double>(), row[1].get<double>(),
                            row[2].get<double>()});
      }
      p.gsi_curves.push_back(std::move(c));
    }
  if (j.contains("gc0_points"))
    for (const auto& jc : j["gc0_points"]) {
      require_keys(jc, {"pump_mw", "tau_coin_s", "value", "sigma"},
                   "gc0 point");
      p.gc0_points.push_back({jc.at("pump_mw").get<double>(),
                              jc.at("tau_coin_s").get<double>(),
                              jc.at("value").get<double>(),
                              jc.at("sigma").get<double>()});
    }
  return p;
}

std::string fit_result_to_json(const FitResult& r) {
  ordered_json j;
  j["schema"] = "hsps-fit-result/1";
  j["rate_per_mw"] = r.rate_per_mw;
  j["rate_per_mw_sigma"] = r.rate_per_mw_sigma;
  j["bandwidth"] = r.bandwidth;
  j["bandwidth_sigma"] = r.bandwidth_sigma;
  j["tau_d"] = r.tau_d;
  j["tau_d_sigma"] = r.tau_d_sigma;
  j["covariance"] = r.covariance;
  j["chi2"] = r.chi2;
  j["dof"] = r.dof;
  j["reference_power_mw"] = r.reference_power_mw;
  j["reference_rate"] = r.reference_rate;
  j["g2c0"] = r.g2c0;
  j["g2c0_sigma"] = r.g2c0_sigma;
  j["starts"] = r.starts;
  j["evaluations"] = r.evaluations;
  return j.dump(2);
}

FitResult fit_result_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("fit result JSON parse error: ") + e.what());
  }
  require_keys(j,
               {"schema", "rate_per_mw", "rate_per_mw_sigma", "bandwidth",
                "bandwidth_sigma", "tau_d", "tau_d_sigma", "covariance",
                "chi2", "dof", "reference_power_mw", "reference_rate", "g2c0",
                "g2c0_sigma", "starts", "evaluations"},
               "fit result");
  if (j.at("schema").get<std::string>() != "hsps-fit-result/1")
    throw ConfigError("fit result: unsupported schema");
  FitResult r;
  r.rate_per_mw = j.at("rate_per_mw").get<double>();
  r.rate_per_mw_sigma = j.at("rate_per_mw_sigma").get<double>();
  r.bandwidth = j.at("bandwidth").get<double>();
  r.bandwidth_sigma = j.at("bandwidth_sigma").get<double>();
  r.tau_d = j.at("tau_d").get<double>();
  r.tau_d_sigma = j.at("tau_d_sigma").get<double>();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      r.covariance[a][b] = j.at("covariance")[a][b].get<double>();
  r.chi2 = j.at("chi2").get<double>();
  r.dof = j.at("dof").get<long>();
  r.reference_power_mw = j.at("reference_power_mw").get<double>();
  r.reference_rate = j.at("reference_rate").get<double>();
  r.g2c0 = j.at("g2c0").get<double>();
  r.g2c0_sigma = j.at("g2c0_sigma").get<double>();
  r.starts = j.at("starts").get<long>();
  r.evaluations = j.at("evaluations").get<long>();
  return r;
}

}  // namespace hsps
