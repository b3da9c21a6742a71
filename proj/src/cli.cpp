#include "marginforge/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "marginforge/lp.hpp"

namespace marginforge {

namespace {

using Clock = std::chrono::steady_clock;

std::optional<Clock::time_point> deadline_after(double secs) {
  if (!(secs > 0.0)) return std::nullopt;
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(secs));
}

int report(std::ostream& err, const std::exception& e, int code) {
  err << "error: " << e.what() << '\n';
  return code;
}

// Maps library errors onto exit codes.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const BudgetError& e) {
    return report(err, e, exit_code::budget_exceeded);
  } catch (const MismatchError& e) {
    return report(err, e, exit_code::input_mismatch);
  } catch (const std::exception& e) {
    return report(err, e, exit_code::other);
  }
}

}  // namespace

double nu_from_fraction(double nu_frac, std::size_t m) {
  if (!(nu_frac > 0.0 && nu_frac <= 1.0)) throw ConfigError("nu-frac must be in (0, 1]");
  return std::clamp(nu_frac * static_cast<double>(m), 1.0, static_cast<double>(m));
}

TrainResult train(const Dataset& data, const RunManifest& manifest) {
  const Algorithm algo = parse_algorithm(manifest.algo);
  BoosterConfig config;
  config.eps = manifest.eps;
  config.nu = nu_from_fraction(manifest.nu_frac, data.size());
  config.max_iterations = manifest.max_iters;
  config.seed = manifest.seed;
  config.deadline = deadline_after(manifest.timeout_secs);

  StumpLearner learner(data);
  TrainResult out;
  out.run = run_algorithm(algo, learner, config);
  out.model = make_model(out.run, learner, data.feature_count());
  out.model.algo = manifest.algo;
  out.model.max_iterations = config.iteration_cap(data.size());
  out.model.seed = manifest.seed;
  return out;
}

OracleResult full_pool_optimum(const Dataset& data, double nu, std::size_t budget) {
  const StumpPool pool(data);
  const double entries = static_cast<double>(pool.size()) * static_cast<double>(data.size());
  if (entries > static_cast<double>(budget)) {
    throw BudgetError("pool of " + std::to_string(pool.size()) + " stumps x " +
                      std::to_string(data.size()) + " examples exceeds the budget of " +
                      std::to_string(budget) + " entries");
  }
  // identical columns add nothing to the LP; fold them before solving
  GainMatrix a(data.size());
  for (std::size_t k = 0; k < pool.size(); ++k) a.add_column(gain_column(data, pool.candidates()[k]), k);
  const EdgeMinSolution sol = solve_edge_min(a, nu);
  OracleResult out;
  out.rho_star = sol.rho;
  out.support_size = sol.w.coeffs.size();
  out.pool_size = pool.size();
  return out;
}

PredictResult predict_all(const TrainedModel& model, const Dataset& data) {
  if (data.size() == 0) throw InputError("empty prediction set");
  if (data.feature_count() != model.feature_count) {
    throw MismatchError("data has " + std::to_string(data.feature_count()) +
                        " features, model expects " + std::to_string(model.feature_count));
  }
  PredictResult out;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = model.predict(data.row(i));
    out.labels.push_back(y);
    if (y != data.label(i)) ++wrong;
  }
  out.error_rate = static_cast<double>(wrong) / static_cast<double>(data.size());
  return out;
}

std::size_t bench_threads(std::size_t requested) {
  std::size_t cap = requested;
  if (cap == 0) {
    if (const char* env = std::getenv("MARGINFORGE_THREADS")) {
      char* end = nullptr;
      const unsigned long v = std::strtoul(env, &end, 10);
      if (end != env && *end == '\0' && v > 0) cap = v;
    }
  }
  if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
  return cap;
}

std::vector<BenchRow> bench(const Dataset& data, const BenchManifest& manifest) {
  if (manifest.algos.empty() || manifest.nu_fracs.empty()) throw ConfigError("empty bench grid");
  std::vector<BenchRow> rows;
  for (const auto& algo : manifest.algos) {
    parse_algorithm(algo);
    for (double frac : manifest.nu_fracs) {
      nu_from_fraction(frac, data.size());
      BenchRow row;
      row.algo = algo;
      row.nu_frac = frac;
      row.seed = manifest.seed;
      rows.push_back(row);
    }
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(rows.size());
  auto worker = [&] {
    for (std::size_t k = next++; k < rows.size(); k = next++) try {
      BenchRow& row = rows[k];
      RunManifest cell;
      cell.algo = row.algo;
      cell.nu_frac = row.nu_frac;
      cell.eps = manifest.eps;
      cell.max_iters = manifest.max_iters;
      cell.seed = manifest.seed;
      cell.timeout_secs = manifest.timeout_secs;
      const auto started = Clock::now();
      const TrainResult r = train(data, cell);
      row.seconds = std::chrono::duration<double>(Clock::now() - started).count();
      row.iterations = r.run.iterations();
      row.final_soft_margin = r.run.soft_margin;
      row.converged = r.run.converged;
      row.timed_out = r.run.timed_out;
    } catch (...) {
      failures[k] = std::current_exception();
    }
  };
  const std::size_t n = std::min(bench_threads(manifest.threads), rows.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << kBenchHeader << '\n';
  for (const auto& r : rows) {
    out << r.algo << ',' << r.nu_frac << ',' << r.seed << ',' << r.iterations << ','
        << std::setprecision(6) << r.seconds << ',' << std::setprecision(17) << r.final_soft_margin
        << ',' << (r.timed_out ? "timed_out" : r.converged ? "true" : "false") << '\n';
    out << std::setprecision(6);
  }
  return out.str();
}

int cmd_train(const RunManifest& manifest, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Dataset data = load_dataset(manifest.data, manifest.format);
    const TrainResult r = train(data, manifest);
    if (!manifest.model_out.empty()) write_atomic(manifest.model_out, model_to_json(r.model));
    if (!manifest.log_out.empty()) write_atomic(manifest.log_out, records_to_jsonl(r.run.records));
    nlohmann::json summary = {{"iterations", r.run.iterations()},
                              {"soft_margin", r.run.soft_margin},
                              {"smoothed", r.run.smoothed},
                              {"converged", r.run.converged}};
    out << summary.dump() << '\n';
    if (!r.run.converged) {
      err << (r.run.timed_out ? "timed out" : "iteration cap reached") << " before eps-optimality\n";
      return exit_code::not_converged;
    }
    return exit_code::ok;
  });
}

int cmd_oracle(const RunManifest& manifest, std::ostream& out, std::ostream& err, std::size_t budget) {
  return guarded(err, [&] {
    const Dataset data = load_dataset(manifest.data, manifest.format);
    const OracleResult r = full_pool_optimum(data, nu_from_fraction(manifest.nu_frac, data.size()), budget);
    out << nlohmann::json{{"rho_star", r.rho_star}, {"support_size", r.support_size}}.dump() << '\n';
    return exit_code::ok;
  });
}

int cmd_predict(const std::string& model_path, const std::string& data_path, DataFormat format,
                std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const TrainedModel model = load_model(model_path);
    const Dataset data = load_dataset(data_path, format);
    const PredictResult r = predict_all(model, data);
    for (int y : r.labels) out << y << '\n';
    out << nlohmann::json{{"error_rate", r.error_rate}}.dump() << '\n';
    return exit_code::ok;
  });
}

int cmd_bench(const BenchManifest& manifest, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Dataset data = load_dataset(manifest.data, manifest.format);
    const std::string csv = bench_csv(bench(data, manifest));
    if (manifest.out.empty()) {
      out << csv;
    } else {
      write_atomic(manifest.out, csv);
    }
    return exit_code::ok;
  });
}

int cmd_generate(const SyntheticSpec& spec, const std::string& path, std::ostream& err) {
  return guarded(err, [&] {
    write_atomic(path, to_csv(two_gaussians(spec)));
    return exit_code::ok;
  });
}

}  // namespace marginforge
