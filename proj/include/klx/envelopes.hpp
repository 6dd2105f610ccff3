#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "klx/kl.hpp"
#include "klx/problem.hpp"

namespace klx::envelopes {

enum class EnvelopeKind { Moreau, ForwardBackward, Bregman };

/// Kernel of the envelope inf_y { f(y) + B_phi(y, x) } with
/// B_phi(y, x) = phi(y) - phi(x) - <grad phi(x), y - x>. The kernel must be
/// strongly convex: grad^2 phi >= a1 I with a1 > 0. Moreau uses
/// phi = ||.||^2/(2 lambda) (a1 = 1/lambda); the forward-backward kind uses
/// phi = ||.||^2/(2 gamma) - h with the instance's smooth part h
/// (a1 = 1/gamma - L_h, which must be positive).
struct EnvelopeSpec {
  EnvelopeKind kind = EnvelopeKind::Moreau;
  double lambda = 1.0;
  double gamma = 0.1;
  std::function<double(const Eigen::VectorXd&)> phi;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> phi_grad;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> phi_hess;
  double a1 = 0.0;  ///< declared modulus for the Bregman kind
};

EnvelopeSpec moreau_spec(double lambda);
EnvelopeSpec fbe_spec(double gamma);
EnvelopeSpec bregman_spec(std::function<double(const Eigen::VectorXd&)> phi,
                          std::function<Eigen::VectorXd(const Eigen::VectorXd&)> phi_grad,
                          std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> phi_hess,
                          double a1);

/// Strong-convexity modulus of the kernel for this (spec, instance) pair;
/// throws when it is not positive.
double modulus(const EnvelopeSpec& spec, const ProblemInstance& f);

/// Bregman distance B_phi(y, x) for the spec's kernel.
double bregman_distance(const EnvelopeSpec& spec, const ProblemInstance& f,
                        const Eigen::VectorXd& y, const Eigen::VectorXd& x);

struct EnvelopeValue {
  double value = 0.0;
  Eigen::VectorXd minimizer;
  bool converged = true;
};

/// Envelope value and inner minimizer at x. Moreau uses the instance prox
/// when f is purely nonsmooth, the forward-backward kind is closed form,
/// and everything else runs an inner prox-gradient solve to 1e-11.
EnvelopeValue bregman_envelope(const ProblemInstance& f, const EnvelopeSpec& spec,
                               const Eigen::VectorXd& x);

/// Minimum kernel-Hessian eigenvalue over the probe points, compared
/// against the required modulus; ok iff margin >= -1e-9.
std::pair<bool, double> check_assumption(const EnvelopeSpec& spec, const ProblemInstance& f,
                                         const std::vector<Eigen::VectorXd>& probes);

/// The envelope as a smooth instance: value by inner minimization, gradient
/// grad^2 phi(x) (x - y*). Unconverged inner solves poison the sample (NaN,
/// filtered by the estimator) and are counted in *discards.
ProblemInstance envelope_instance(const ProblemInstance& f, const EnvelopeSpec& spec,
                                  std::shared_ptr<long> discards = nullptr);

struct TransferReport {
  kl::KLEstimate alpha_f;
  kl::KLEstimate alpha_envelope;
  bool predicted_equal = true;
  EnvelopeKind kind = EnvelopeKind::Moreau;
  bool outside_theorem_range = false;  ///< measured alpha(f) below 1/2
  double legacy_bound = 0.0;           ///< max(1/2, a/(2-2a)) at measured alpha(f)
  long poisoned_samples = 0;
};

/// Paired estimate of the exponent of f and of its envelope around a shared
/// minimizer; the transfer prediction is equality for alpha in [1/2, 1).
TransferReport transfer_experiment(const ProblemInstance& f, const EnvelopeSpec& spec,
                                   const Eigen::VectorXd& x_bar, kl::SampleOpts opts);

}  // namespace klx::envelopes
