#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "klx/problem.hpp"
#include "klx/trace.hpp"

namespace klx::kl {

/// Raised when the sampler or estimator cannot produce a meaningful result
/// (all samples filtered, insufficient gap range, trace too short). Mapped
/// to exit code 2 by the CLI.
class EstimatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GapResidualSample {
  double gap;       ///< f(x) - f* > 0
  double residual;  ///< stationarity surrogate for dist(0, subdifferential)
};

struct SampleSet {
  std::vector<GapResidualSample> samples;
  std::string surrogate;  ///< "min-norm-subgradient" | "prox-gradient-residual"
};

struct KLEstimate {
  double alpha_hat = 0.0;
  double c_hat = 0.0;
  std::pair<double, double> window{0.0, 0.0};  ///< (gap_min, gap_max) used
  int n_points = 0;                            ///< samples entering the fit
  double fit_quality = 0.0;                    ///< R^2 of OLS on the bin minima
  std::string surrogate;
  bool fit_failure = false;  ///< slope outside [0, 1]
};

struct SampleOpts {
  double r0 = 1.0;
  double rho = 0.7;
  int n_radii = 40;
  int n_dirs = 8;
  std::uint64_t seed = 0;
  /// For max-type instances exposing piece values: bisect between adjacent
  /// directions whose leading piece differs and sample the tie point, where
  /// the subdifferential is widest. The KL inequality quantifies over all
  /// nearby points, so the estimand is this worst case.
  bool kink_search = true;
};

/// Stationarity surrogate at x: the closed-form minimum-norm subgradient
/// distance when the model provides one, otherwise the prox-gradient
/// residual ||x - prox_{gamma g}(x - gamma grad h(x))|| / gamma with
/// gamma = 1/L (or the supplied positive gamma).
double residual(const ProblemInstance& inst, const Eigen::VectorXd& x, double gamma = 0.0);

/// Radial sampling on log-spaced shells around x_bar; candidates are pushed
/// through the instance's domain projection and samples with
/// gap <= 1e-12 (1 + |f*|) are discarded.
SampleSet sample_around(const ProblemInstance& inst, const Eigen::VectorXd& x_bar,
                        double f_star, const SampleOpts& opts);

/// Harvest (gap, residual) pairs from a solver trace. Iterates of the
/// proximal gradient method identify the active manifold, which makes this
/// the sound sampling scheme near nonsmooth minimizers.
SampleSet samples_from_trace(const ProblemInstance& inst, const IterateTrace& trace,
                             double f_star);

/// Lower-envelope exponent fit: 20 logarithmic gap bins, minimum residual
/// per bin, Theil-Sen slope over the bin minima. Requires >= 20 samples
/// spanning >= 3 decades of gap.
KLEstimate estimate_exponent(const SampleSet& set);

enum class RateKind { Linear, Sublinear, Undetermined };

struct RateClass {
  RateKind kind = RateKind::Undetermined;
  double rate = 0.0;   ///< per-iteration contraction factor (linear)
  double power = 0.0;  ///< gap ~ k^power (sublinear)
  double fit_r2 = 0.0;
  std::string detail;
};

/// Fits log(gap) vs k and log(gap) vs log k on the tail half of the trace;
/// classification requires R^2 >= 0.98, otherwise Undetermined.
RateClass classify_rate(const IterateTrace& trace, double f_star);

/// Exponent of a pointwise minimum over the active indices: the maximum.
double combine_min_exponents(const std::vector<double>& alphas);

/// Theil-Sen line fit (median of pairwise slopes, median intercept).
std::pair<double, double> theil_sen(const std::vector<double>& xs,
                                    const std::vector<double>& ys);

/// R^2 of the ordinary least-squares line through (xs, ys).
double ols_r2(const std::vector<double>& xs, const std::vector<double>& ys);

void write_samples_csv(std::ostream& os, const SampleSet& set);
void write_samples_csv(const std::string& path, const SampleSet& set);
void write_estimate_json(std::ostream& os, const KLEstimate& est);
void write_estimate_json(const std::string& path, const KLEstimate& est);

}  // namespace klx::kl
