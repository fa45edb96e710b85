#include "zsg/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "zsg/discounted.hpp"
#include "zsg/episodic.hpp"
#include "zsg/evaluation.hpp"
#include "zsg/game.hpp"
#include "zsg/game_io.hpp"
#include "zsg/matrix_qre.hpp"
#include "zsg/metrics.hpp"
#include "zsg/simplex.hpp"

namespace zsg {

namespace {

struct Summary {
  double final_gap = 0.0;
  long iterations = 0;
  std::optional<double> rho_hat, r_squared;
  std::optional<bool> thm1_eq12, thm1_eq13, thm2_q, thm2_gap;
  double runtime_s = 0.0;
};

std::string bool_or_null(const std::optional<bool>& v) {
  if (!v) return "null";
  return *v ? "true" : "false";
}

std::string num_or_null(const std::optional<double>& v) {
  return v ? format_double(*v) : "null";
}

std::string summary_to_json(const Summary& s) {
  std::ostringstream os;
  os << "{\n"
     << "  \"final_gap\": " << format_double(s.final_gap) << ",\n"
     << "  \"iterations\": " << s.iterations << ",\n"
     << "  \"rho_hat\": " << num_or_null(s.rho_hat) << ",\n"
     << "  \"r_squared\": " << num_or_null(s.r_squared) << ",\n"
     << "  \"thm1_eq12_holds\": " << bool_or_null(s.thm1_eq12) << ",\n"
     << "  \"thm1_eq13_holds\": " << bool_or_null(s.thm1_eq13) << ",\n"
     << "  \"thm2_q_holds\": " << bool_or_null(s.thm2_q) << ",\n"
     << "  \"thm2_gap_holds\": " << bool_or_null(s.thm2_gap) << ",\n"
     << "  \"runtime_s\": " << format_double(s.runtime_s) << "\n"
     << "}\n";
  return os.str();
}

// Fit on kl_zeta when a reference was available, else on the duality gap;
// episodic traces use the h = 0 rows. Degenerate series leave nulls.
void fit_summary_rate(const std::vector<MetricsRecord>& trace, bool episodic, Summary& s) {
  std::vector<std::pair<long, double>> series;
  for (const auto& r : trace) {
    if (episodic && (!r.h || *r.h != 0)) continue;
    const double v = r.kl_zeta ? *r.kl_zeta : r.dual_gap;
    series.emplace_back(r.iter, v);
  }
  try {
    const RateFit fit = fit_rate(series);
    s.rho_hat = fit.rho_hat;
    s.r_squared = fit.r_squared;
  } catch (const std::exception&) {
  }
}

void strip_timing(std::vector<MetricsRecord>& trace, Summary& s) {
  for (auto& r : trace) r.elapsed_s = 0.0;
  s.runtime_s = 0.0;
}

PayoffMatrix load_matrix(const ExperimentSpec& spec) {
  if (spec.game_file.empty()) {
    PayoffMatrix A;
    A.rows = spec.num_actions_max;
    A.cols = spec.num_actions_min;
    if (A.rows <= 0 || A.cols <= 0)
      throw std::runtime_error("matrix mode: need positive action counts");
    A.a = generate_random_payoff(spec.config.seed, A.rows, A.cols);
    return A;
  }
  const nlohmann::json j = nlohmann::json::parse(read_text_file(spec.game_file));
  if (j.value("kind", "") != "matrix")
    throw std::runtime_error("matrix mode: file field 'kind' must be \"matrix\"");
  PayoffMatrix A;
  A.rows = j.at("rows").get<int>();
  A.cols = j.at("cols").get<int>();
  A.a = j.at("payoff").get<std::vector<double>>();
  if (static_cast<int>(A.a.size()) != A.rows * A.cols)
    throw std::runtime_error("matrix mode: 'payoff' length does not match rows*cols");
  return A;
}

int run_matrix(const ExperimentSpec& spec) {
  const PayoffMatrix A = load_matrix(spec);
  const double tau = spec.config.tau;
  const double eta = spec.config.eta > 0.0 ? spec.config.eta : default_matrix_step(A, tau);

  // The oracle for KL columns: the same update run to reference_tol.
  std::optional<MatrixQreResult> ref;
  if (spec.reference == ReferenceMode::kCompute) {
    MatrixQreResult r = solve_matrix_qre(A, tau, eta, spec.reference_tol,
                                         10 * spec.config.max_iters + 1000000);
    if (r.converged) ref = std::move(r);
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  MatrixGameState st = MatrixGameState::uniform(A.rows, A.cols);
  std::vector<MetricsRecord> trace;
  Summary sum;
  bool converged = false;
  for (long t = 0; t <= spec.config.max_iters; ++t) {
    const bool last = (t == spec.config.max_iters);
    if (t % spec.config.log_every == 0 || last) {
      MetricsRecord rec;
      rec.iter = t;
      rec.dual_gap = matrix_duality_gap(A, tau, st.mu, st.nu);
      if (ref) {
        rec.kl_zeta = kl_divergence(ref->mu, st.mu) + kl_divergence(ref->nu, st.nu);
        rec.kl_zeta_bar =
            kl_divergence(ref->mu, st.mu_bar) + kl_divergence(ref->nu, st.nu_bar);
      }
      rec.elapsed_s = elapsed();
      trace.push_back(rec);
      sum.final_gap = rec.dual_gap;
      if (rec.dual_gap <= spec.config.tol) {
        converged = true;
        break;
      }
    }
    if (last) break;
    st = omwu_matrix_step(A, tau, eta, st);
  }
  sum.iterations = st.iteration;
  sum.runtime_s = elapsed();
  fit_summary_rate(trace, false, sum);
  if (spec.no_timing) strip_timing(trace, sum);

  std::filesystem::create_directories(spec.out_dir);
  write_text_file(spec.out_dir + "/trace.csv", trace_to_csv(trace, false));
  write_text_file(spec.out_dir + "/summary.json", summary_to_json(sum));
  return converged ? 0 : 2;
}

int run_discounted_experiment(const ExperimentSpec& spec, const DiscountedGame& game) {
  SolverConfig config = spec.config;
  if (config.eta <= 0.0) config.mode = StepMode::kTheorem;

  const std::string game_json = serialize_game(game);
  const uint64_t hash = fnv1a_hash(game_json);

  std::optional<ReferenceSolution> ref;
  std::string cache_path;
  bool cache_fresh = false;
  if (spec.reference == ReferenceMode::kLoad) {
    ref = parse_reference(read_text_file(spec.reference_path), game.num_states,
                          game.num_actions_max, game.num_actions_min);
  } else if (spec.reference == ReferenceMode::kCompute) {
    cache_path = spec.out_dir + "/" +
                 reference_cache_name(hash, config.tau, spec.reference_tol);
    if (std::filesystem::exists(cache_path)) {
      ref = parse_reference(read_text_file(cache_path), game.num_states, game.num_actions_max,
                            game.num_actions_min);
    } else {
      ref = solve_reference_qre(game, config.tau, spec.reference_tol, config.jobs);
      cache_fresh = true;
    }
  }

  RunResult res = run_discounted(game, config, ref ? &*ref : nullptr);

  Summary sum;
  sum.final_gap = res.final_gap;
  sum.iterations = res.iterations;
  sum.runtime_s = res.runtime_s;
  fit_summary_rate(res.trace, false, sum);
  if (ref) {
    TheoremCheckConfig tc;
    tc.eta = res.eta;
    tc.tau = config.tau;
    tc.gamma = game.gamma;
    tc.num_states = game.num_states;
    sum.thm1_eq12 = check_thm1_kl_bound(res.trace, tc).holds;
    sum.thm1_eq13 = check_thm1_gap_bound(res.trace, tc).holds;
  }
  if (spec.no_timing) strip_timing(res.trace, sum);

  std::filesystem::create_directories(spec.out_dir);
  if (cache_fresh) write_text_file(cache_path, serialize_reference(*ref));
  write_text_file(spec.out_dir + "/trace.csv", trace_to_csv(res.trace, false));
  write_text_file(spec.out_dir + "/summary.json", summary_to_json(sum));
  return res.converged ? 0 : 2;
}

int run_episodic_experiment(const ExperimentSpec& spec, const EpisodicGame& game) {
  SolverConfig config = spec.config;
  if (spec.reference == ReferenceMode::kLoad)
    throw std::runtime_error("episodic mode: reference=load is not supported");

  std::optional<EpisodicReferenceSolution> ref;
  if (spec.reference == ReferenceMode::kCompute)
    ref = solve_reference_qre(game, config.tau, spec.reference_tol);

  EpisodicRunResult res = run_episodic(game, config, ref ? &*ref : nullptr);

  Summary sum;
  sum.final_gap = res.final_gap;
  sum.iterations = res.iterations;
  sum.runtime_s = res.runtime_s;
  fit_summary_rate(res.trace, true, sum);
  if (ref) {
    TheoremCheckConfig tc;
    tc.eta = res.eta;
    tc.tau = config.tau;
    tc.horizon = game.horizon;
    tc.num_states = game.num_states;
    sum.thm2_q = check_thm2_q_bound(res.trace, tc).holds;
    sum.thm2_gap = check_thm2_gap_bound(res.trace, tc).holds;
  }
  if (spec.no_timing) strip_timing(res.trace, sum);

  std::filesystem::create_directories(spec.out_dir);
  write_text_file(spec.out_dir + "/trace.csv", trace_to_csv(res.trace, true));
  write_text_file(spec.out_dir + "/summary.json", summary_to_json(sum));
  return res.converged ? 0 : 2;
}

}  // namespace

int run_experiment(const ExperimentSpec& spec) {
  try {
    if (spec.mode == "matrix") return run_matrix(spec);

    AnyGame game;
    if (!spec.game_file.empty()) {
      game = load_game_file(spec.game_file);
    } else if (spec.mode == "episodic") {
      game = generate_random_episodic_game(spec.config.seed, spec.horizon, spec.num_states,
                                           spec.num_actions_max, spec.num_actions_min);
    } else {
      game = generate_random_game(spec.config.seed, spec.num_states, spec.num_actions_max,
                                  spec.num_actions_min, spec.gamma);
    }

    if (spec.mode == "discounted") {
      if (!std::holds_alternative<DiscountedGame>(game))
        throw std::runtime_error("discounted mode: game file holds an episodic game");
      const auto& g = std::get<DiscountedGame>(game);
      const ValidationReport rep = validate_game(g);
      if (!rep.ok()) throw std::runtime_error(rep.joined());
      return run_discounted_experiment(spec, g);
    }
    if (spec.mode == "episodic") {
      if (!std::holds_alternative<EpisodicGame>(game))
        throw std::runtime_error("episodic mode: game file holds a discounted game");
      const auto& g = std::get<EpisodicGame>(game);
      const ValidationReport rep = validate_game(g);
      if (!rep.ok()) throw std::runtime_error(rep.joined());
      return run_episodic_experiment(spec, g);
    }
    throw std::runtime_error("unknown mode: " + spec.mode);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace zsg
