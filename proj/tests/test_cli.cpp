#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include <json.hpp>

#include "marginforge/cli.hpp"
#include "support.hpp"

using namespace marginforge;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::string strip_wall_time(const std::string& log) {
  return std::regex_replace(log, std::regex("\"wall_time_ns\":[0-9]+"), "\"wall_time_ns\":0");
}

struct Fixture {
  testsupport::TempDir dir{"cli"};
  std::string separable = dir.file("separable.csv");
  std::string gauss = dir.file("gauss.csv");

  Fixture() {
    write_atomic(separable, "x0,x1,label\n-2,0.3,-1\n-1,0.1,-1\n-0.5,0.9,-1\n1,0.2,1\n2,0.5,1\n3,0.4,1\n");
    std::ostringstream err;
    REQUIRE(cmd_generate({80, 4, 1.5, 0.05, 21}, gauss, err) == exit_code::ok);
  }

  RunManifest run(const std::string& data, const std::string& algo) const {
    RunManifest m;
    m.data = data;
    m.algo = algo;
    m.nu_frac = 0.1;
    m.eps = 0.05;
    m.model_out = dir.file(algo + ".json");
    m.log_out = dir.file(algo + ".jsonl");
    return m;
  }
};

}  // namespace

TEST_CASE("train: separable fixture, artifacts and log length") {
  Fixture f;
  std::ostringstream out, err;
  const auto m = f.run(f.separable, "mlpb-ss");
  REQUIRE(cmd_train(m, out, err) == exit_code::ok);
  const auto summary = nlohmann::json::parse(out.str());
  CHECK(summary["converged"] == true);
  CHECK(summary["soft_margin"].get<double>() >= 1.0 - 0.05);
  CHECK(line_count(slurp(m.log_out)) == summary["iterations"].get<std::size_t>());
  const auto model = load_model(m.model_out);
  CHECK(model.converged);
  CHECK(model.algo == "mlpb-ss");
}

TEST_CASE("train: exit 2 when the cap is hit, artifacts still written") {
  Fixture f;
  auto m = f.run(f.gauss, "cerlpboost");
  m.eps = 0.001;
  m.max_iters = 3;
  std::ostringstream out, err;
  CHECK(cmd_train(m, out, err) == exit_code::not_converged);
  CHECK(line_count(slurp(m.log_out)) == 3);
  CHECK_FALSE(load_model(m.model_out).converged);
}

TEST_CASE("train: configuration errors exit 1") {
  Fixture f;
  std::ostringstream out, err;
  auto m = f.run(f.gauss, "adaboost");
  CHECK(cmd_train(m, out, err) == exit_code::other);
  m = f.run(f.gauss, "mlpb-ss");
  m.nu_frac = 1.5;
  CHECK(cmd_train(m, out, err) == exit_code::other);
  m = f.run(f.dir.file("nope.csv"), "mlpb-ss");
  CHECK(cmd_train(m, out, err) == exit_code::other);
  CHECK(nu_from_fraction(0.001, 80) == 1.0);
  CHECK(nu_from_fraction(1.0, 80) == 80.0);
  CHECK(nu_from_fraction(0.1, 80) == doctest::Approx(8.0));
}

TEST_CASE("oracle") {
  Fixture f;
  std::ostringstream out, err;
  RunManifest m = f.run(f.separable, "mlpb-ss");
  REQUIRE(cmd_oracle(m, out, err) == exit_code::ok);
  const auto sep = nlohmann::json::parse(out.str());
  CHECK(sep["rho_star"].get<double>() >= 1.0 - 1e-8);
  CHECK(sep.contains("support_size"));

  std::ostringstream small_out;
  CHECK(cmd_oracle(f.run(f.gauss, "x"), small_out, err, 100) == exit_code::budget_exceeded);

  // nu = m: the soft margin is the mean margin, maximized by one stump
  const Dataset data = load_dataset(f.gauss, DataFormat::csv);
  const StumpPool pool(data);
  double best_mean = -1;
  for (const auto& h : pool.candidates()) {
    double s = 0;
    for (std::size_t i = 0; i < data.size(); ++i) s += data.label(i) * h.predict(data.row(i));
    best_mean = std::max(best_mean, s / data.size());
  }
  CHECK(full_pool_optimum(data, 80.0).rho_star == doctest::Approx(best_mean).epsilon(1e-10));

  // cross-command: the trained objective is within eps of the oracle
  const double rho_star = full_pool_optimum(data, nu_from_fraction(0.1, data.size())).rho_star;
  std::ostringstream train_out;
  REQUIRE(cmd_train(f.run(f.gauss, "mlpb-ss"), train_out, err) == exit_code::ok);
  const double trained = nlohmann::json::parse(train_out.str())["soft_margin"].get<double>();
  CHECK(trained >= rho_star - 0.05);
  CHECK(trained <= rho_star + 1e-9);
}

TEST_CASE("predict") {
  Fixture f;
  std::ostringstream out, err;
  const auto m = f.run(f.gauss, "mlpb-ss");
  REQUIRE(cmd_train(m, out, err) == exit_code::ok);

  std::ostringstream pred;
  REQUIRE(cmd_predict(m.model_out, f.gauss, DataFormat::csv, pred, err) == exit_code::ok);
  std::istringstream lines(pred.str());
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  REQUIRE(rows.size() == 81);
  const double rate = nlohmann::json::parse(rows.back())["error_rate"].get<double>();

  // recount from the model file by direct summation
  const auto model = load_model(m.model_out);
  const Dataset data = load_dataset(f.gauss, DataFormat::csv);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double s = 0;
    for (std::size_t k = 0; k < model.hypotheses.size(); ++k) {
      const auto& h = model.hypotheses[k];
      s += model.weights[k] * (data.feature(i, h.feature) >= h.threshold ? h.polarity : -h.polarity);
    }
    const int y = s >= 0 ? 1 : -1;
    CHECK(rows[i] == std::to_string(y));
    wrong += y != data.label(i);
  }
  CHECK(rate == doctest::Approx(static_cast<double>(wrong) / data.size()));
  // 80 examples, 5% flipped labels, separation 1.5: a converged model fits well
  CHECK(rate <= 0.25);

  // flipped labels give the complementary rate
  std::vector<int> flipped = data.labels();
  for (int& y : flipped) y = -y;
  const Dataset neg(data.features(), data.feature_count(), flipped);
  const auto flipped_path = f.dir.file("flipped.csv");
  write_atomic(flipped_path, to_csv(neg));
  std::ostringstream pred2;
  REQUIRE(cmd_predict(m.model_out, flipped_path, DataFormat::csv, pred2, err) == exit_code::ok);
  const std::string text = pred2.str();
  const auto tail = text.substr(text.rfind('{'));
  CHECK(nlohmann::json::parse(tail)["error_rate"].get<double>() == doctest::Approx(1.0 - rate));

  // width mismatch and empty input
  CHECK(cmd_predict(m.model_out, f.separable, DataFormat::csv, pred2, err) == exit_code::input_mismatch);
  const auto empty = f.dir.file("empty.csv");
  write_atomic(empty, "x0,x1,x2,x3,label\n");
  CHECK(cmd_predict(m.model_out, empty, DataFormat::csv, pred2, err) == exit_code::other);
  CHECK_THROWS_AS(predict_all(model, Dataset({1.0}, 1, {1})), MismatchError);
}

TEST_CASE("bench") {
  Fixture f;
  BenchManifest b;
  b.data = f.gauss;
  b.algos = {"mlpb-ss", "lpboost"};
  b.nu_fracs = {0.1, 0.3};
  b.eps = 0.05;
  b.out = f.dir.file("bench.csv");
  std::ostringstream out, err;
  REQUIRE(cmd_bench(b, out, err) == exit_code::ok);
  const std::string csv = slurp(b.out);
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "algo,nu_frac,seed,iterations,seconds,final_soft_margin,converged");
  const Dataset data = load_dataset(f.gauss, DataFormat::csv);
  std::string row;
  std::size_t n = 0;
  while (std::getline(lines, row)) {
    ++n;
    std::vector<std::string> cells;
    std::stringstream ss(row);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 7);
    CHECK(cells[6] == "true");
    const double frac = std::stod(cells[1]);
    const double rho_star = full_pool_optimum(data, nu_from_fraction(frac, data.size())).rho_star;
    CHECK(std::stod(cells[5]) >= rho_star - 0.05);
  }
  CHECK(n == 4);

  // grid order is algo-major and independent of the thread count
  b.threads = 1;
  const auto serial = bench(data, b);
  b.threads = 4;
  const auto parallel = bench(data, b);
  REQUIRE(serial.size() == 4);
  CHECK(serial[0].algo == "mlpb-ss");
  CHECK(serial[1].nu_frac == 0.3);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(serial[k].iterations == parallel[k].iterations);
    CHECK(serial[k].final_soft_margin == parallel[k].final_soft_margin);
  }
}

TEST_CASE("bench: timed out cells are marked and the sweep continues") {
  Fixture f;
  BenchManifest b;
  b.data = f.gauss;
  b.algos = {"cerlpboost"};
  b.nu_fracs = {0.1, 0.2};
  b.eps = 0.0005;
  b.timeout_secs = 1e-6;
  std::ostringstream out, err;
  REQUIRE(cmd_bench(b, out, err) == exit_code::ok);
  CHECK(line_count(out.str()) == 3);
  CHECK(out.str().find(",timed_out\n") != std::string::npos);
}

TEST_CASE("bench threads from the environment") {
  CHECK(bench_threads(3) == 3);
  setenv("MARGINFORGE_THREADS", "2", 1);
  CHECK(bench_threads(0) == 2);
  setenv("MARGINFORGE_THREADS", "junk", 1);
  CHECK(bench_threads(0) >= 1);
  unsetenv("MARGINFORGE_THREADS");
}

TEST_CASE("same manifest, same bytes") {
  Fixture f;
  for (const char* algo : {"mlpb-pfw", "erlpboost", "lpboost"}) {
    auto a = f.run(f.gauss, algo);
    auto b = a;
    b.model_out = f.dir.file(std::string(algo) + "-2.json");
    b.log_out = f.dir.file(std::string(algo) + "-2.jsonl");
    std::ostringstream out, err;
    REQUIRE(cmd_train(a, out, err) == exit_code::ok);
    REQUIRE(cmd_train(b, out, err) == exit_code::ok);
    CHECK(slurp(a.model_out) == slurp(b.model_out));
    CHECK(strip_wall_time(slurp(a.log_out)) == strip_wall_time(slurp(b.log_out)));
  }
}
