// marginforge: train / oracle / predict / bench / generate.
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "marginforge/cli.hpp"

namespace mf = marginforge;

namespace {

void data_flags(CLI::App* cmd, std::string& data, std::string& format) {
  cmd->add_option("--data", data, "dataset path")->required();
  cmd->add_option("--format", format, "csv or libsvm")
      ->check(CLI::IsMember({"csv", "libsvm"}))
      ->capture_default_str();
}

void run_flags(CLI::App* cmd, mf::RunManifest& m) {
  cmd->add_option("--nu-frac", m.nu_frac, "nu as a fraction of m, in (0, 1]")->capture_default_str();
  cmd->add_option("--eps", m.eps, "tolerance")->capture_default_str();
  cmd->add_option("--max-iters", m.max_iters, "iteration cap, 0 = theoretical bound + 16")
      ->capture_default_str();
  cmd->add_option("--seed", m.seed)->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soft-margin boosting via Frank-Wolfe"};
  app.require_subcommand(1);

  mf::RunManifest run;
  std::string format = "csv";

  auto* train = app.add_subcommand("train", "train a stump ensemble");
  data_flags(train, run.data, format);
  run_flags(train, run);
  train->add_option("--algo", run.algo, "lpboost|erlpboost|cerlpboost|mlpb-ss|mlpb-pfw|mlpb-ls|mlpb-classic")
      ->capture_default_str();
  train->add_option("--model-out", run.model_out);
  train->add_option("--log-out", run.log_out);
  train->add_option("--timeout-secs", run.timeout_secs, "0 = none");

  std::size_t budget = mf::kDefaultOracleBudget;
  auto* oracle = app.add_subcommand("oracle", "soft-margin LP optimum over the full stump pool");
  data_flags(oracle, run.data, format);
  oracle->add_option("--nu-frac", run.nu_frac)->capture_default_str();
  oracle->add_option("--budget", budget, "max pool size x m")->capture_default_str();

  std::string model_path;
  auto* predict = app.add_subcommand("predict", "label a dataset with a saved model");
  predict->add_option("--model", model_path)->required();
  data_flags(predict, run.data, format);

  mf::BenchManifest bench;
  std::string algos = "lpboost,erlpboost,cerlpboost,mlpb-ss,mlpb-pfw";
  auto* bench_cmd = app.add_subcommand("bench", "sweep algorithms x nu fractions");
  data_flags(bench_cmd, bench.data, format);
  bench_cmd->add_option("--algo", algos, "comma separated")->capture_default_str();
  bench_cmd->add_option("--nu-frac", bench.nu_fracs, "one or more fractions")
      ->delimiter(',')
      ->default_str("0.1,0.2,0.3,0.4,0.5");
  bench_cmd->add_option("--eps", bench.eps)->capture_default_str();
  bench_cmd->add_option("--max-iters", bench.max_iters)->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed)->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "csv path, stdout if omitted");
  bench_cmd->add_option("--timeout-secs", bench.timeout_secs, "per cell, 0 = none");

  mf::SyntheticSpec synth;
  std::string synth_out;
  auto* gen = app.add_subcommand("generate", "write a two-Gaussian csv");
  gen->add_option("--out", synth_out)->required();
  gen->add_option("--examples", synth.examples)->capture_default_str();
  gen->add_option("--features", synth.features)->capture_default_str();
  gen->add_option("--separation", synth.separation)->capture_default_str();
  gen->add_option("--flip", synth.flip)->capture_default_str();
  gen->add_option("--seed", synth.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mf::exit_code::other;
  }

  try {
    run.format = mf::parse_format(format);
    bench.format = run.format;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return mf::exit_code::other;
  }

  if (*train) return mf::cmd_train(run, std::cout, std::cerr);
  if (*oracle) return mf::cmd_oracle(run, std::cout, std::cerr, budget);
  if (*predict) return mf::cmd_predict(model_path, run.data, run.format, std::cout, std::cerr);
  if (*bench_cmd) {
    if (bench.nu_fracs.empty()) bench.nu_fracs = {0.1, 0.2, 0.3, 0.4, 0.5};
    for (std::size_t start = 0; start <= algos.size();) {
      const std::size_t comma = std::min(algos.find(',', start), algos.size());
      if (comma > start) bench.algos.push_back(algos.substr(start, comma - start));
      start = comma + 1;
    }
    return mf::cmd_bench(bench, std::cout, std::cerr);
  }
  return mf::cmd_generate(synth, synth_out, std::cerr);
}
