#include "klx/kl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "klx/io_util.hpp"
#include "klx/rng.hpp"

namespace klx::kl {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct OlsFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
  bool ok = false;
};

OlsFit ols(const std::vector<double>& xs, const std::vector<double>& ys) {
  OlsFit fit;
  const size_t n = xs.size();
  if (n < 2) return fit;
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += e * e;
  }
  fit.r2 = 1.0 - ss_res / syy;
  fit.ok = true;
  return fit;
}

}  // namespace

std::pair<double, double> theil_sen(const std::vector<double>& xs,
                                    const std::vector<double>& ys) {
  std::vector<double> slopes;
  for (size_t i = 0; i < xs.size(); ++i)
    for (size_t j = i + 1; j < xs.size(); ++j) {
      const double dx = xs[j] - xs[i];
      if (std::abs(dx) < 1e-12) continue;
      slopes.push_back((ys[j] - ys[i]) / dx);
    }
  if (slopes.empty()) throw EstimatorError("theil_sen: degenerate abscissae");
  const double slope = median_of(slopes);
  std::vector<double> residues(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) residues[i] = ys[i] - slope * xs[i];
  return {slope, median_of(residues)};
}

double ols_r2(const std::vector<double>& xs, const std::vector<double>& ys) {
  return ols(xs, ys).r2;
}

double residual(const ProblemInstance& inst, const VectorXd& x, double gamma) {
  if (inst.has_subgrad_dist()) {
    const VectorXd w = inst.has_smooth() ? inst.gradient(x) : VectorXd::Zero(x.size());
    return inst.nonsmooth.subgrad_dist(x, w);
  }
  if (inst.has_smooth() && inst.has_prox()) {
    double g = gamma;
    if (g <= 0.0) g = (inst.smooth.lipschitz > 0.0) ? 1.0 / inst.smooth.lipschitz : 1.0;
    const VectorXd next = inst.nonsmooth.prox(x - g * inst.gradient(x), g);
    return (x - next).norm() / g;
  }
  if (inst.has_smooth() && !inst.nonsmooth.value) return inst.gradient(x).norm();
  throw EstimatorError("residual: model exposes neither a subgradient oracle nor a prox");
}

SampleSet sample_around(const ProblemInstance& inst, const VectorXd& x_bar,
                        double f_star, const SampleOpts& opts) {
  if (!std::isfinite(f_star)) throw EstimatorError("sample_around: f* must be finite");
  SampleSet out;
  out.surrogate = inst.has_subgrad_dist() ? "min-norm-subgradient" : "prox-gradient-residual";
  const double floor = 1e-12 * (1.0 + std::abs(f_star));

  auto try_push = [&](const VectorXd& raw) {
    VectorXd x = inst.domain_project ? inst.domain_project(raw) : raw;
    const double gap = inst.value(x) - f_star;
    if (!(gap > floor) || !std::isfinite(gap)) return;
    const double res = residual(inst, x);
    if (!std::isfinite(res) || !(res > 0.0)) return;
    out.samples.push_back({gap, res});
  };

  for (int j = 0; j < opts.n_radii; ++j) {
    const double r = opts.r0 * std::pow(opts.rho, j);
    std::vector<VectorXd> dirs;
    std::vector<Index> leading;
    for (int i = 0; i < opts.n_dirs; ++i) {
      Rng rng = Rng::stream(opts.seed, static_cast<std::uint64_t>(j),
                            static_cast<std::uint64_t>(i));
      const VectorXd u = rng.unit_vector(inst.dim);
      const VectorXd x = x_bar + r * u;
      try_push(x);
      if (inst.piece_values && opts.kink_search) {
        Index which = 0;
        inst.piece_values(x).maxCoeff(&which);
        dirs.push_back(u);
        leading.push_back(which);
      }
    }
    // Tie refinement: bisect great-circle arcs whose endpoints have
    // different leading pieces down to the tie manifold.
    for (size_t i = 0; i < dirs.size(); ++i) {
      const size_t a_idx = i;
      const size_t b_idx = (i + 1) % dirs.size();
      if (a_idx == b_idx || leading[a_idx] == leading[b_idx]) continue;
      const Index pa = leading[a_idx], pb = leading[b_idx];
      VectorXd a = dirs[a_idx], b = dirs[b_idx];
      auto sign_at = [&](const VectorXd& u) {
        const VectorXd f = inst.piece_values(x_bar + r * u);
        return f[pa] - f[pb];
      };
      if (!(sign_at(a) >= 0.0 && sign_at(b) <= 0.0)) continue;
      bool degenerate = false;
      for (int it = 0; it < 80; ++it) {
        VectorXd mid = a + b;
        const double nrm = mid.norm();
        if (nrm < 1e-12) {
          degenerate = true;
          break;
        }
        mid /= nrm;
        if (sign_at(mid) >= 0.0)
          a = mid;
        else
          b = mid;
      }
      if (!degenerate) try_push(x_bar + r * a);
    }
  }
  if (out.samples.empty())
    throw EstimatorError("sample_around: every sample was filtered");
  return out;
}

SampleSet samples_from_trace(const ProblemInstance& inst, const IterateTrace& trace,
                             double f_star) {
  SampleSet out;
  out.surrogate = inst.has_subgrad_dist() ? "min-norm-subgradient" : "prox-gradient-residual";
  const double floor = 1e-12 * (1.0 + std::abs(f_star));
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double gap = trace.values[k] - f_star;
    const double res = trace.residuals[k];
    if (gap > floor && std::isfinite(gap) && std::isfinite(res) && res > 0.0)
      out.samples.push_back({gap, res});
  }
  if (out.samples.empty())
    throw EstimatorError("samples_from_trace: every sample was filtered");
  return out;
}

KLEstimate estimate_exponent(const SampleSet& set) {
  std::vector<GapResidualSample> samples;
  for (const auto& s : set.samples)
    if (std::isfinite(s.gap) && s.gap > 0.0 && std::isfinite(s.residual) && s.residual > 0.0)
      samples.push_back(s);
  if (samples.size() < 20)
    throw EstimatorError("estimate_exponent: need at least 20 samples");
  double gmin = samples[0].gap, gmax = samples[0].gap;
  for (const auto& s : samples) {
    gmin = std::min(gmin, s.gap);
    gmax = std::max(gmax, s.gap);
  }
  if (std::log10(gmax / gmin) < 3.0)
    throw EstimatorError("estimate_exponent: samples span fewer than 3 decades of gap");

  // The KL inequality lower-bounds residuals, so the estimand is the lower
  // envelope: the minimum residual per logarithmic gap bin.
  constexpr int kBins = 20;
  const double lo = std::log(gmin), hi = std::log(gmax);
  const double width = (hi - lo) / kBins;
  std::vector<double> bin_res(kBins, std::numeric_limits<double>::infinity());
  std::vector<double> bin_gap(kBins, 0.0);
  for (const auto& s : samples) {
    int b = static_cast<int>((std::log(s.gap) - lo) / width);
    b = std::clamp(b, 0, kBins - 1);
    if (s.residual < bin_res[b]) {
      bin_res[b] = s.residual;
      bin_gap[b] = s.gap;
    }
  }
  std::vector<double> xs, ys;
  for (int b = 0; b < kBins; ++b) {
    if (!std::isfinite(bin_res[b])) continue;
    xs.push_back(std::log(bin_gap[b]));
    ys.push_back(std::log(bin_res[b]));
  }
  if (xs.size() < 3)
    throw EstimatorError("estimate_exponent: fewer than 3 populated gap bins");

  const auto [slope, intercept] = theil_sen(xs, ys);
  KLEstimate est;
  est.alpha_hat = std::clamp(slope, 0.0, 1.05);
  est.fit_failure = (slope > 1.0) || (slope < 0.0);
  est.c_hat = std::exp(intercept);
  est.window = {gmin, gmax};
  est.n_points = static_cast<int>(samples.size());
  est.fit_quality = ols_r2(xs, ys);
  est.surrogate = set.surrogate;
  return est;
}

RateClass classify_rate(const IterateTrace& trace, double f_star) {
  std::vector<double> gaps;
  for (double v : trace.values) {
    const double g = v - f_star;
    if (g > 1e-13)
      gaps.push_back(g);
    else
      break;  // converged past the gap floor
  }
  if (gaps.size() < 50)
    throw EstimatorError("classify_rate: need at least 50 tail iterations above the gap floor");

  RateClass out;
  for (size_t k = 0; k + 1 < gaps.size(); ++k) {
    if (gaps[k + 1] > gaps[k] + 1e-12) {
      out.kind = RateKind::Undetermined;
      out.detail = "gap sequence not monotone";
      return out;
    }
  }

  const size_t start = gaps.size() / 2;
  std::vector<double> ks, logks, logg;
  for (size_t k = start; k < gaps.size(); ++k) {
    ks.push_back(static_cast<double>(k));
    logks.push_back(std::log(static_cast<double>(k)));
    logg.push_back(std::log(gaps[k]));
  }
  const OlsFit lin = ols(ks, logg);
  const OlsFit pow = ols(logks, logg);
  const double best = std::max(lin.ok ? lin.r2 : 0.0, pow.ok ? pow.r2 : 0.0);
  if (best < 0.98) {
    out.kind = RateKind::Undetermined;
    out.detail = "no model reaches R^2 >= 0.98";
    out.fit_r2 = best;
    return out;
  }
  if ((lin.ok ? lin.r2 : 0.0) >= (pow.ok ? pow.r2 : 0.0)) {
    out.kind = RateKind::Linear;
    out.rate = std::exp(lin.slope);
    out.fit_r2 = lin.r2;
    out.detail = "geometric decay";
  } else {
    out.kind = RateKind::Sublinear;
    out.power = pow.slope;
    out.fit_r2 = pow.r2;
    out.detail = "power-law decay";
  }
  return out;
}

double combine_min_exponents(const std::vector<double>& alphas) {
  if (alphas.empty())
    throw std::invalid_argument("combine_min_exponents: empty exponent list");
  double m = 0.0;
  for (double a : alphas) {
    if (!(a >= 0.0 && a < 1.0))
      throw std::invalid_argument("combine_min_exponents: exponents must lie in [0,1)");
    m = std::max(m, a);
  }
  return m;
}

void write_samples_csv(std::ostream& os, const SampleSet& set) {
  os << "gap,residual\n";
  for (const auto& s : set.samples)
    os << num17(s.gap) << "," << num17(s.residual) << "\n";
}

void write_samples_csv(const std::string& path, const SampleSet& set) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_samples_csv: cannot open " + path);
  write_samples_csv(os, set);
}

void write_estimate_json(std::ostream& os, const KLEstimate& est) {
  os << "{\n"
     << "  \"alpha_hat\": " << num17(est.alpha_hat) << ",\n"
     << "  \"c_hat\": " << num17(est.c_hat) << ",\n"
     << "  \"window\": [" << num17(est.window.first) << ", " << num17(est.window.second)
     << "],\n"
     << "  \"n_points\": " << est.n_points << ",\n"
     << "  \"fit_quality\": " << num17(est.fit_quality) << ",\n"
     << "  \"surrogate\": \"" << est.surrogate << "\",\n"
     << "  \"fit_failure\": " << (est.fit_failure ? "true" : "false") << "\n"
     << "}\n";
}

void write_estimate_json(const std::string& path, const KLEstimate& est) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_estimate_json: cannot open " + path);
  write_estimate_json(os, est);
}

}  // namespace klx::kl
