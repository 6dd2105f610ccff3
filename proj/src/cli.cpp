#include "klx/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "klx/config.hpp"
#include "klx/dc.hpp"
#include "klx/envelopes.hpp"
#include "klx/io_util.hpp"
#include "klx/kl.hpp"
#include "klx/lagrangian.hpp"
#include "klx/models.hpp"
#include "klx/rng.hpp"
#include "klx/sdp_repr.hpp"
#include "klx/solvers.hpp"
#include "klx/trace.hpp"

namespace klx::cli {

namespace fs = std::filesystem;
using config::Config;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Shared {
  Config cfg;
  fs::path out;
  std::optional<std::uint64_t> seed_override;
};

std::string json_opt(const std::optional<double>& v) {
  return v ? num17(*v) : std::string("null");
}

nlohmann::json model_json(const Config& cfg, std::optional<std::uint64_t> seed_override) {
  const auto* sec = cfg.section("model");
  if (!sec) throw std::invalid_argument("config: missing [model] section");
  nlohmann::json params = nlohmann::json::object();
  std::string kind;
  std::uint64_t seed = 0;
  for (const auto& [key, value] : *sec) {
    if (key == "kind") {
      kind = std::get<std::string>(value);
    } else if (key == "seed") {
      seed = static_cast<std::uint64_t>(std::get<std::int64_t>(value));
    } else if (std::holds_alternative<std::int64_t>(value)) {
      params[key] = std::get<std::int64_t>(value);
    } else if (std::holds_alternative<double>(value)) {
      params[key] = std::get<double>(value);
    } else if (std::holds_alternative<bool>(value)) {
      params[key] = std::get<bool>(value);
    } else if (std::holds_alternative<std::string>(value)) {
      params[key] = std::get<std::string>(value);
    } else if (std::holds_alternative<std::vector<double>>(value)) {
      params[key] = std::get<std::vector<double>>(value);
    }
  }
  if (kind.empty()) throw std::invalid_argument("config: model.kind is required");
  if (seed_override) seed = *seed_override;
  return models::instance_config(kind, seed, params);
}

kl::SampleOpts estimator_opts(const Config& cfg, double suggested_r0,
                              std::uint64_t seed) {
  kl::SampleOpts opts;
  opts.r0 = cfg.get_double("estimator", "r0", suggested_r0);
  opts.rho = cfg.get_double("estimator", "rho", 0.7);
  opts.n_radii = static_cast<int>(cfg.get_int("estimator", "radii", 40));
  opts.n_dirs = static_cast<int>(cfg.get_int("estimator", "dirs", 8));
  opts.kink_search = cfg.get_bool("estimator", "kink_search", true);
  opts.seed = seed;
  return opts;
}

solvers::SolveOpts solver_opts(const Config& cfg) {
  solvers::SolveOpts opts;
  opts.max_iter = static_cast<int>(cfg.get_int("solver", "max_iter", 200000));
  opts.tol = cfg.get_double("solver", "tol", 1e-12);
  opts.step = cfg.get_double("solver", "step", 0.0);
  opts.backtracking = cfg.get_bool("solver", "backtracking", false);
  return opts;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << text;
}

int cmd_estimate_kl(const Shared& sh) {
  const nlohmann::json mj = model_json(sh.cfg, sh.seed_override);
  models::GeneratedInstance gen = models::make_instance(mj);
  const std::uint64_t seed = mj.at("seed").get<std::uint64_t>();

  std::string sampling = sh.cfg.get_string("estimator", "sampling", gen.default_sampling);
  const bool solvable = gen.inst.has_smooth() && (gen.inst.has_prox() || !gen.inst.nonsmooth.value);

  VectorXd x_bar;
  double f_star = 0.0;
  IterateTrace trace;
  bool have_trace = false;
  if (solvable) {
    const solvers::RefSolution ref = solvers::reference_solve(gen.inst, gen.x0);
    x_bar = ref.x;
    f_star = ref.value;
    trace = solvers::prox_gradient(gen.inst, gen.x0, solver_opts(sh.cfg));
    have_trace = true;
  } else if (gen.x_star && gen.f_star) {
    x_bar = *gen.x_star;
    f_star = *gen.f_star;
    if (sampling == "trace") sampling = "radial";
  } else {
    throw std::invalid_argument("model is neither solvable nor equipped with a known minimizer");
  }
  if (gen.x_star && gen.f_star && sampling == "radial") {
    // Prefer the planted point when one exists: it is exact.
    x_bar = *gen.x_star;
    f_star = *gen.f_star;
  }

  kl::SampleSet samples =
      (sampling == "trace")
          ? kl::samples_from_trace(gen.inst, trace, f_star)
          : kl::sample_around(gen.inst, x_bar, f_star, estimator_opts(sh.cfg, gen.suggested_r0, seed));
  const kl::KLEstimate est = kl::estimate_exponent(samples);

  fs::create_directories(sh.out);
  if (have_trace) write_trace_csv((sh.out / "trace.csv").string(), trace, f_star);
  kl::write_samples_csv((sh.out / "samples.csv").string(), samples);
  kl::write_estimate_json((sh.out / "estimate.json").string(), est);

  std::ostringstream rep;
  rep << "{\n"
      << "  \"model\": \"" << gen.inst.meta.name << "\",\n"
      << "  \"seed\": " << seed << ",\n"
      << "  \"certified_exponent\": " << json_opt(gen.inst.meta.certified_exponent) << ",\n"
      << "  \"certification\": \"" << gen.inst.meta.certification << "\",\n"
      << "  \"convex\": " << (gen.inst.meta.convex ? "true" : "false") << ",\n"
      << "  \"alpha_hat\": " << num17(est.alpha_hat) << ",\n"
      << "  \"c_hat\": " << num17(est.c_hat) << ",\n"
      << "  \"fit_quality\": " << num17(est.fit_quality) << ",\n"
      << "  \"n_points\": " << est.n_points << ",\n"
      << "  \"sampling\": \"" << sampling << "\",\n"
      << "  \"surrogate\": \"" << est.surrogate << "\",\n"
      << "  \"surrogate_only\": " << (gen.inst.meta.convex ? "false" : "true") << ",\n"
      << "  \"f_star\": " << num17(f_star) << "\n"
      << "}\n";
  write_text(sh.out / "report.json", rep.str());
  std::cout << "alpha_hat=" << num17(est.alpha_hat)
            << " certified=" << json_opt(gen.inst.meta.certified_exponent) << "\n";
  return 0;
}

int cmd_verify_rate(const Shared& sh) {
  const nlohmann::json mj = model_json(sh.cfg, sh.seed_override);
  const std::string kind = mj.at("kind").get<std::string>();
  IterateTrace trace;
  double f_star = 0.0;
  if (kind == "rank-ls") {
    const auto params = mj.value("params", nlohmann::json::object());
    const models::RankInstance ri = models::make_rank_instance(
        mj.at("seed").get<std::uint64_t>(), params.value("m", 4), params.value("n", 4),
        params.value("k", 2));
    solvers::SolveOpts opts = solver_opts(sh.cfg);
    trace = solvers::iht_rank(ri.amap, ri.b, ri.k, MatrixXd::Zero(ri.m, ri.n), opts);
    f_star = 0.0;  // planted consistent instance
  } else {
    models::GeneratedInstance gen = models::make_instance(mj);
    const solvers::RefSolution ref = solvers::reference_solve(gen.inst, gen.x0);
    f_star = ref.value;
    trace = solvers::prox_gradient(gen.inst, gen.x0, solver_opts(sh.cfg));
  }
  const kl::RateClass rate = kl::classify_rate(trace, f_star);
  fs::create_directories(sh.out);
  write_trace_csv((sh.out / "trace.csv").string(), trace, f_star);
  std::ostringstream os;
  os << "{\n  \"kind\": \""
     << (rate.kind == kl::RateKind::Linear
             ? "linear"
             : (rate.kind == kl::RateKind::Sublinear ? "sublinear" : "undetermined"))
     << "\",\n  \"rate\": " << num17(rate.rate) << ",\n  \"power\": " << num17(rate.power)
     << ",\n  \"fit_r2\": " << num17(rate.fit_r2) << ",\n  \"detail\": \"" << rate.detail
     << "\"\n}\n";
  write_text(sh.out / "rate.json", os.str());
  std::cout << "rate_class="
            << (rate.kind == kl::RateKind::Linear
                    ? "linear"
                    : (rate.kind == kl::RateKind::Sublinear ? "sublinear" : "undetermined"))
            << " r2=" << num17(rate.fit_r2) << "\n";
  return 0;
}

sdp_repr::LiftedSdp build_lift(const Config& cfg, std::uint64_t seed) {
  const std::string kind = cfg.get_string("lift", "kind", "l1");
  if (kind == "x4") return sdp_repr::lift_quartic();
  if (kind == "l1") {
    const int n = static_cast<int>(cfg.get_int("lift", "cols", 2));
    std::vector<sdp_repr::LmiAtom> atoms;
    for (int j = 0; j < n; ++j) atoms.push_back(sdp_repr::atom_abs(n, j, 1.0));
    return sdp_repr::lift_sum_lmi(atoms);
  }
  if (kind == "ls-plus-abs") {
    const int n = static_cast<int>(cfg.get_int("lift", "cols", 2));
    const int p = static_cast<int>(cfg.get_int("lift", "rows", 3));
    Rng rng(seed);
    const MatrixXd a = rng.normal_matrix(p, n);
    const VectorXd b = rng.normal_vector(p);
    std::vector<sdp_repr::LmiAtom> atoms{sdp_repr::atom_least_squares(a, b)};
    for (int j = 0; j < n; ++j) atoms.push_back(sdp_repr::atom_abs(n, j, 1.0));
    return sdp_repr::lift_sum_lmi(atoms);
  }
  throw std::invalid_argument("lift.kind must be one of l1, ls-plus-abs, x4");
}

int cmd_lift_sdp(const Shared& sh) {
  const std::uint64_t seed =
      sh.seed_override ? *sh.seed_override
                       : static_cast<std::uint64_t>(sh.cfg.get_int("lift", "seed", 0));
  const sdp_repr::LiftedSdp lift = build_lift(sh.cfg, seed);
  Rng rng(seed ^ 0xabcdef12345ull);

  int faithful = 0, dominated = 0;
  const int trials = static_cast<int>(sh.cfg.get_int("lift", "trials", 1000));
  double worst_eq = 0.0;
  for (int t = 0; t < trials; ++t) {
    const VectorXd x = rng.normal_vector(lift.n);
    const auto [u_star, t_star] = lift.minimizing_lift(x);
    const double f = lift.represented(x);
    const double fv = lift.f_value(x, u_star, t_star);
    worst_eq = std::max(worst_eq, std::abs(fv - f));
    if (std::abs(fv - f) <= 1e-9 * (1.0 + std::abs(f))) ++faithful;
    // Random feasible lifted point: F >= f must hold.
    const auto [u_rand, t_rand] = lift.random_feasible_lift(x, rng);
    if (lift.f_value(x, u_rand, t_rand) >= f - 1e-9 * (1.0 + std::abs(f))) ++dominated;
  }
  const bool slater_ok = sdp_repr::min_eig(lift.assemble(lift.slater)) > 0.0;

  const sdp_repr::ReducedBasis basis = sdp_repr::orthogonalize_basis(lift);
  const sdp_repr::ReducedPair pair = sdp_repr::build_reduced_pair(basis, lift.a00);

  fs::create_directories(sh.out);
  sdp_repr::write_sdpa(lift, (sh.out / "lift.dat-s").string());
  std::ostringstream os;
  os << "{\n  \"dim\": " << lift.dim << ",\n  \"n\": " << lift.n
     << ",\n  \"n_lifted\": " << lift.nlift << ",\n  \"trials\": " << trials
     << ",\n  \"faithful\": " << faithful << ",\n  \"dominated\": " << dominated
     << ",\n  \"worst_equality_error\": " << num17(worst_eq)
     << ",\n  \"slater_ok\": " << (slater_ok ? "true" : "false")
     << ",\n  \"basis_size\": " << basis.hat.size()
     << ",\n  \"kernel_size\": " << basis.kernel.size()
     << ",\n  \"adjoint_gram_condition\": " << num17(pair.adjoint_gram_condition())
     << "\n}\n";
  write_text(sh.out / "lift.json", os.str());
  const bool ok = slater_ok && faithful == trials && dominated == trials;
  std::cout << "lift_checks=" << (ok ? "pass" : "fail") << " exported=lift.dat-s\n";
  if (!ok) {
    std::cerr << "lift-sdp: faithfulness checks failed\n";
    return 1;
  }
  return 0;
}

int cmd_check_sc(const Shared& sh) {
  const std::string model = sh.cfg.get_string("sc", "model", "lasso");
  const std::uint64_t seed =
      sh.seed_override ? *sh.seed_override
                       : static_cast<std::uint64_t>(sh.cfg.get_int("sc", "seed", 0));
  sdp_repr::ScMargin margin;
  double planted = 0.0;
  if (model == "lasso") {
    const auto inst = sdp_repr::make_planted_lasso(
        seed, static_cast<int>(sh.cfg.get_int("sc", "rows", 10)),
        static_cast<int>(sh.cfg.get_int("sc", "cols", 6)),
        static_cast<int>(sh.cfg.get_int("sc", "support", 2)),
        sh.cfg.get_double("sc", "mu", 1.0), sh.cfg.get_double("sc", "rho_frac", 0.5));
    margin = sdp_repr::check_sc_l1(inst.a, inst.b, inst.mu, inst.xbar);
    planted = inst.margin;
  } else if (model == "nuclear") {
    const auto inst = sdp_repr::make_planted_nuclear(
        seed, static_cast<int>(sh.cfg.get_int("sc", "m", 5)),
        static_cast<int>(sh.cfg.get_int("sc", "n", 4)),
        static_cast<int>(sh.cfg.get_int("sc", "rank", 2)),
        sh.cfg.get_double("sc", "nu", 1.0), sh.cfg.get_double("sc", "w_norm", 0.3));
    margin = sdp_repr::check_sc_nuclear(inst.amap, inst.b, inst.nu, inst.m, inst.n, inst.xbar);
    planted = inst.margin;
  } else {
    throw std::invalid_argument("sc.model must be lasso or nuclear");
  }
  fs::create_directories(sh.out);
  std::ostringstream os;
  os << "{\n  \"model\": \"" << model << "\",\n  \"planted_margin\": " << num17(planted)
     << ",\n  \"measured_margin\": " << num17(margin.margin)
     << ",\n  \"warning\": " << (margin.warning ? "true" : "false") << ",\n  \"note\": \""
     << margin.note << "\"\n}\n";
  write_text(sh.out / "sc.json", os.str());
  std::cout << "margin=" << num17(margin.margin) << " planted=" << num17(planted) << "\n";
  return 0;
}

int cmd_dc_run(const Shared& sh) {
  const std::uint64_t seed =
      sh.seed_override ? *sh.seed_override
                       : static_cast<std::uint64_t>(sh.cfg.get_int("dc", "seed", 5));
  const int n = static_cast<int>(sh.cfg.get_int("dc", "cols", 3));
  const int p = static_cast<int>(sh.cfg.get_int("dc", "rows", n));
  const double mu = sh.cfg.get_double("dc", "mu", 0.4);
  const double nu = sh.cfg.get_double("dc", "nu", 0.2);
  Rng rng(seed);
  const MatrixXd a = (p == n && sh.cfg.get_bool("dc", "identity", true))
                         ? MatrixXd::Identity(n, n)
                         : MatrixXd(rng.normal_matrix(p, n) / std::sqrt(double(p)));
  VectorXd target(n);
  for (int i = 0; i < n; ++i) target[i] = 1.5 + rng.uniform();
  const VectorXd b = a * target;
  const dc::DcModel model = dc::make_l12(a, b, mu, nu);

  solvers::SolveOpts opts = solver_opts(sh.cfg);
  opts.tol = sh.cfg.get_double("solver", "tol", 1e-12);
  const IterateTrace trace = solvers::dca(model, VectorXd::Zero(n), opts);
  const VectorXd x_bar = trace.points.back();

  kl::SampleOpts sopts = estimator_opts(sh.cfg, 1.0, seed);
  const dc::TransferReport rep = dc::dc_transfer_experiment(model, x_bar, sopts);

  fs::create_directories(sh.out);
  write_trace_csv((sh.out / "trace.csv").string(), trace, dc::f_value(model, x_bar));
  std::ostringstream os;
  os << "{\n  \"alpha_f\": " << num17(rep.alpha_f.alpha_hat)
     << ",\n  \"alpha_joint\": " << num17(rep.alpha_joint.alpha_hat)
     << ",\n  \"consistent\": " << (rep.consistent ? "true" : "false")
     << ",\n  \"certified\": null,\n  \"note\": \"measured only; this family carries no"
        " certified exponent\",\n  \"termination\": \""
     << trace.termination << "\"\n}\n";
  write_text(sh.out / "dc.json", os.str());
  std::cout << "alpha_f=" << num17(rep.alpha_f.alpha_hat)
            << " alpha_joint=" << num17(rep.alpha_joint.alpha_hat) << "\n";
  return 0;
}

int cmd_envelope_transfer(const Shared& sh) {
  const std::string kind = sh.cfg.get_string("envelope", "kind", "moreau");
  const nlohmann::json mj = model_json(sh.cfg, sh.seed_override);
  models::GeneratedInstance gen = models::make_instance(mj);
  const std::uint64_t seed = mj.at("seed").get<std::uint64_t>();

  VectorXd x_bar;
  if (gen.x_star) {
    x_bar = *gen.x_star;
  } else {
    x_bar = solvers::reference_solve(gen.inst, gen.x0).x;
  }
  envelopes::EnvelopeSpec spec =
      (kind == "fbe")
          ? envelopes::fbe_spec(sh.cfg.get_double("envelope", "gamma",
                                                  0.5 / std::max(gen.inst.smooth.lipschitz, 1.0)))
          : envelopes::moreau_spec(sh.cfg.get_double("envelope", "lambda", 1.0));
  kl::SampleOpts opts = estimator_opts(sh.cfg, gen.suggested_r0, seed);
  const envelopes::TransferReport rep =
      envelopes::transfer_experiment(gen.inst, spec, x_bar, opts);

  fs::create_directories(sh.out);
  std::ostringstream os;
  os << "{\n  \"kind\": \"" << kind << "\",\n  \"alpha_f\": "
     << num17(rep.alpha_f.alpha_hat)
     << ",\n  \"alpha_envelope\": " << num17(rep.alpha_envelope.alpha_hat)
     << ",\n  \"predicted_equal\": " << (rep.predicted_equal ? "true" : "false")
     << ",\n  \"outside_theorem_range\": " << (rep.outside_theorem_range ? "true" : "false")
     << ",\n  \"legacy_bound\": " << num17(rep.legacy_bound)
     << ",\n  \"poisoned_samples\": " << rep.poisoned_samples
     << ",\n  \"estimator_tolerance\": 0.1\n}\n";
  write_text(sh.out / "envelope.json", os.str());
  std::cout << "alpha_f=" << num17(rep.alpha_f.alpha_hat)
            << " alpha_envelope=" << num17(rep.alpha_envelope.alpha_hat) << "\n";
  return 0;
}

struct CellSpec {
  std::string command;
  std::string config_path;
  fs::path out_override;
  std::optional<std::uint64_t> seed;
};

int run_cell(const CellSpec& cell) {
  Shared sh;
  sh.cfg = Config::parse_file(cell.config_path);
  sh.seed_override = cell.seed;
  sh.out = cell.out_override.empty()
               ? fs::path(sh.cfg.get_string("", "output", "out"))
               : cell.out_override;
  if (cell.command == "estimate-kl") return cmd_estimate_kl(sh);
  if (cell.command == "verify-rate") return cmd_verify_rate(sh);
  if (cell.command == "lift-sdp") return cmd_lift_sdp(sh);
  if (cell.command == "check-sc") return cmd_check_sc(sh);
  if (cell.command == "dc-run") return cmd_dc_run(sh);
  if (cell.command == "envelope-transfer") return cmd_envelope_transfer(sh);
  throw std::invalid_argument("unknown command " + cell.command);
}

int dispatch(const std::string& command, const std::vector<std::string>& configs,
             std::optional<std::uint64_t> seed, const std::string& out_override) {
  if (configs.empty()) {
    std::cerr << "klx " << command << ": at least one --config FILE is required\n";
    return 1;
  }
  std::vector<CellSpec> cells;
  for (size_t i = 0; i < configs.size(); ++i) {
    CellSpec cell;
    cell.command = command;
    cell.config_path = configs[i];
    cell.out_override = out_override.empty() ? fs::path() : fs::path(out_override);
    // Independent cells take seed ^ cell-index when a seed is forced.
    if (seed) cell.seed = *seed ^ static_cast<std::uint64_t>(i);
    cells.push_back(cell);
  }
  int threads = 1;
  if (const char* env = std::getenv("KLX_THREADS")) threads = std::max(1, std::atoi(env));

  int worst = 0;
  if (threads > 1 && cells.size() > 1) {
    std::vector<std::future<int>> futs;
    for (const auto& cell : cells)
      futs.push_back(std::async(std::launch::async, [cell]() { return run_cell(cell); }));
    for (auto& f : futs) worst = std::max(worst, f.get());
  } else {
    for (const auto& cell : cells) worst = std::max(worst, run_cell(cell));
  }
  return worst;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"KL-exponent laboratory: solvers, samplers, lifts, and reports"};
  app.require_subcommand(1);

  std::vector<std::string> configs;
  std::optional<std::uint64_t> seed;
  std::string out_override;
  std::uint64_t seed_raw = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", configs, "experiment config file(s), one cell each");
    sub->add_option("--seed", seed_raw, "override the config seed");
    sub->add_option("--output", out_override, "override the output directory");
  };

  CLI::App* est = app.add_subcommand("estimate-kl", "sample and fit a KL exponent");
  add_common(est);
  CLI::App* rate = app.add_subcommand("verify-rate", "solve and classify the convergence rate");
  add_common(rate);
  CLI::App* lift = app.add_subcommand("lift-sdp", "build an epigraph lift, check it, export SDPA");
  add_common(lift);
  CLI::App* sc = app.add_subcommand("check-sc", "strict-complementarity margin of a planted instance");
  add_common(sc);
  CLI::App* dcr = app.add_subcommand("dc-run", "DCA on a difference-of-convex model plus transfer report");
  add_common(dcr);
  CLI::App* env = app.add_subcommand("envelope-transfer", "paired exponent estimate for an envelope");
  add_common(env);

  CLI::App* rank = app.add_subcommand("rank-exponent", "exact certified exponent for the rank model");
  int rm = 0, rn = 0, rk = 0;
  rank->add_option("m", rm, "rows")->required();
  rank->add_option("n", rn, "cols")->required();
  rank->add_option("k", rk, "rank bound")->required();

  std::vector<const char*> argv;
  argv.push_back("klx");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (rank->parsed()) {
      const lagrangian::RationalExponent exp = lagrangian::rank_exponent(rm, rn, rk);
      std::cout << "tau=" << exp.tau_value << " exponent=" << exp.numerator << "/"
                << exp.denominator << "\n";
      return 0;
    }
    for (CLI::App* sub : {est, rate, lift, sc, dcr, env}) {
      if (!sub->parsed()) continue;
      if (sub->count("--seed") > 0) seed = seed_raw;
      return dispatch(sub->get_name(), configs, seed, out_override);
    }
    return 1;
  } catch (const kl::EstimatorError& e) {
    std::cerr << "klx: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "klx: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace klx::cli
