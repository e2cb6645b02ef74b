// Command-line driver: runs each bundled experiment reproducibly and writes
// machine-readable results (result.json, trace.csv) plus optional SVG plots.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "dppl/models/color.hpp"
#include "dppl/models/tables.hpp"
#include "dppl/models/thermometer.hpp"
#include "svg.hpp"

using json = nlohmann::ordered_json;
using namespace dppl;
namespace fs = std::filesystem;

namespace {

constexpr const char* kArtifactVersion = "0.1.0";
constexpr int kSchemaVersion = 1;

struct CliOptions {
  std::string experiment;
  std::uint64_t seed = 0;
  int num_seeds = 1;
  int jobs = 1;
  std::string output_dir = "out";
  bool emit_plots = false;

  // HMC; negative means "use the experiment default"
  int n_samples = -1;
  int leapfrog_steps = -1;
  double eps = -1;
  int skip = -1;

  // gradient descent
  int gd_steps = -1;
  double lr = -1;
  double momentum = -1;
  double max_grad_norm = -1;

  double lambda_distinct = 0.5;
};

struct ExperimentSetup {
  HmcHyperparams hmc;
  ChainInit init;
  GdConfig gd;
};

ExperimentSetup defaults_for(const std::string& experiment) {
  ExperimentSetup s;
  if (experiment == "thermometer") {
    s.hmc = {1000, 300, 0.01, 100};
    s.init = {1, 0};
    s.gd = {100, 0.1, 0.0, SeedPolicy::Fixed};
  } else if (experiment == "color") {
    s.hmc = {300, 48, 0.025, 60};
    s.init = {4, 10};
    s.gd = {40, 0.1, 0.5, SeedPolicy::Fixed, 2.0};
  } else if (experiment == "tables") {
    s.hmc = {500, 72, 0.006, 150};
    s.init = {6, 20};
    s.gd = {30, 0.1, 0.5, SeedPolicy::Fixed, 2.0};
  }
  return s;
}

ExperimentSetup apply_overrides(const CliOptions& opt) {
  ExperimentSetup s = defaults_for(opt.experiment);
  if (opt.n_samples > 0) s.hmc.n_samples = opt.n_samples;
  if (opt.leapfrog_steps > 0) s.hmc.leapfrog_steps = opt.leapfrog_steps;
  if (opt.eps > 0) s.hmc.step_size = opt.eps;
  if (opt.skip >= 0) s.hmc.skip = opt.skip;
  if (opt.gd_steps > 0) s.gd.steps = opt.gd_steps;
  if (opt.lr > 0) s.gd.learning_rate = opt.lr;
  if (opt.momentum >= 0) s.gd.momentum = opt.momentum;
  if (opt.max_grad_norm > 0) s.gd.max_grad_norm = opt.max_grad_norm;
  validate(s.hmc);
  return s;
}

json config_json(const CliOptions& opt, const ExperimentSetup& s, std::uint64_t seed) {
  json cfg;
  cfg["experiment"] = opt.experiment;
  cfg["seed"] = seed;
  cfg["hmc"] = {{"n_samples", s.hmc.n_samples},
                {"leapfrog_steps", s.hmc.leapfrog_steps},
                {"eps", s.hmc.step_size},
                {"skip", s.hmc.skip}};
  cfg["chain_init"] = {{"candidates", s.init.candidates}, {"probe_samples", s.init.probe_samples}};
  cfg["gd"] = {{"steps", s.gd.steps},
               {"learning_rate", s.gd.learning_rate},
               {"momentum", s.gd.momentum},
               {"max_grad_norm",
                std::isfinite(s.gd.max_grad_norm) ? json(s.gd.max_grad_norm) : json(nullptr)}};
  if (opt.experiment == "color") cfg["lambda_distinct"] = opt.lambda_distinct;
  cfg["emit_plots"] = opt.emit_plots;
  return cfg;
}

void write_trace_csv(const fs::path& dir, const OptimizationTrace& trace) {
  std::ofstream out(dir / "trace.csv");
  out << "iteration,loss,gradient_norm\n";
  out.precision(17);
  for (size_t k = 0; k < trace.losses.size(); ++k)
    out << k << "," << trace.losses[k] << "," << trace.gradient_norms[k] << "\n";
}

json run_experiment(const CliOptions& opt, const ExperimentSetup& setup, std::uint64_t seed,
                    const fs::path& dir) {
  auto t0 = std::chrono::steady_clock::now();
  RandomKey key(seed);

  json result;
  result["schema_version"] = kSchemaVersion;
  result["artifact_version"] = kArtifactVersion;
  result["config"] = config_json(opt, setup, seed);

  std::shared_ptr<InferencePipeline> pipeline;
  std::vector<double> init_params;
  if (opt.experiment == "thermometer") {
    pipeline = models::thermometer_pipeline(setup.hmc);
    init_params = {100.0};
  } else if (opt.experiment == "color") {
    models::ColorExperimentConfig cfg;
    cfg.hmc = setup.hmc;
    cfg.init = setup.init;
    cfg.lambda_distinct = opt.lambda_distinct;
    pipeline = models::color_pipeline(cfg);
    init_params = models::color_initial_stimulus(key.split(1000));
  } else {
    models::TablesExperimentConfig cfg;
    cfg.hmc = setup.hmc;
    cfg.init = setup.init;
    pipeline = models::tables_pipeline(cfg);
    init_params = models::tables_initial_stimulus(key.split(1000), cfg.n_tables);
  }

  Objective objective = InferencePipeline::objective(pipeline);
  OptimizationTrace trace = gradient_descent(objective, init_params, setup.gd, key);
  const std::vector<double>& best = trace.best_iterate();

  result["losses"] = trace.losses;
  result["gradient_norms"] = trace.gradient_norms;
  result["best_iteration"] = trace.best_index();
  result["best_loss"] = trace.best_loss();
  result["backward_failures"] = pipeline->backward_failures();

  json final_params;
  if (opt.experiment == "thermometer") {
    final_params["m"] = best[0];
  } else if (opt.experiment == "color") {
    models::ColorScene scene = models::decode_color_stimulus(best);
    final_params = {{"temp", scene.temp},
                    {"brightness", scene.brightness},
                    {"color1", scene.color1},
                    {"color2", scene.color2}};
  } else {
    models::TableScene scene = models::decode_tables_stimulus(best, 2);
    final_params["camera"] = {{"r", scene.r}, {"theta", scene.theta}, {"h", scene.h}};
    json tables = json::array();
    for (const auto& t : scene.tables) tables.push_back({{"size", t.size}, {"pos", t.pos}});
    final_params["tables"] = tables;
  }
  result["final_parameters"] = final_params;

  // posterior at the solution: named means plus per-sample summary
  InferResult inf = pipeline->infer_at(best, key);
  HmcSampler& sampler = pipeline->sampler();
  const CompiledModel& cm = sampler.compiled();
  json inferred;
  for (const auto& seg : cm.return_layout()) {
    if (seg.shape.size() == 1) {
      inferred[seg.name] = inf.mean_returns[size_t(seg.offset)];
    } else {
      inferred[seg.name] = std::vector<double>(
          inf.mean_returns.begin() + seg.offset,
          inf.mean_returns.begin() + seg.offset + seg.shape.size());
    }
  }
  result["final_inferred"] = inferred;

  const SampleSet& set = inf.samples;
  const int rdim = int(inf.mean_returns.size());
  std::vector<std::vector<double>> rows;
  for (int i = set.hyper.skip; i < set.count(); ++i)
    rows.push_back(sampler.eval_returns(set.position(i)));
  std::vector<double> mean(size_t(rdim), 0.0), sd(size_t(rdim), 0.0);
  for (const auto& row : rows)
    for (int k = 0; k < rdim; ++k) mean[size_t(k)] += row[size_t(k)];
  for (double& m : mean) m /= double(rows.size());
  for (const auto& row : rows)
    for (int k = 0; k < rdim; ++k) {
      double d = row[size_t(k)] - mean[size_t(k)];
      sd[size_t(k)] += d * d;
    }
  for (double& s : sd) s = std::sqrt(s / double(rows.size()));
  result["sample_summary"] = {{"mean", mean}, {"stddev", sd}, {"count", rows.size()}};

  write_trace_csv(dir, trace);
  if (opt.emit_plots) {
    dppl_cli::write_line_plot((dir / "loss_curve.svg").string(), trace.losses,
                              opt.experiment + " loss");
    if (opt.experiment == "thermometer") {
      std::vector<double> ts;
      for (const auto& row : rows) ts.push_back(row[0]);
      dppl_cli::write_histogram((dir / "posterior_hist.svg").string(), ts,
                                "posterior temperature samples");
    }
  }

  auto t1 = std::chrono::steady_clock::now();
  result["wall_clock_seconds"] = std::chrono::duration<double>(t1 - t0).count();
  return result;
}

// gradient check across all bundled models: analytic backward vs
// common-random-number central differences
json run_gradcheck(std::uint64_t seed, bool* all_ok) {
  json rows = json::array();
  auto check = [&rows](const std::string& name, const Objective& obj,
                       const std::vector<double>& x, double h, const RandomKey& key) {
    LossEval e = obj.value_and_grad(x, key);
    std::vector<double> fd = finite_diff_gradient(obj, x, h, key);
    for (size_t i = 0; i < x.size(); ++i) {
      double rel = std::abs(e.gradient[i]) > 1e-3
                       ? std::abs(e.gradient[i] - fd[i]) / std::abs(e.gradient[i])
                       : 0.0;
      rows.push_back({{"parameter", name + "[" + std::to_string(i) + "]"},
                      {"analytic", e.gradient[i]},
                      {"finite_difference", fd[i]},
                      {"relative_error", rel},
                      {"checked", std::abs(e.gradient[i]) > 1e-3}});
    }
  };

  RandomKey key(seed);
  {
    HmcHyperparams h{200, 60, 0.01, 40};
    check("thermometer.m", models::thermometer_objective(h), {100.0}, 0.1, key.split(1));
  }
  {
    models::ColorExperimentConfig cfg;
    cfg.hmc = {120, 30, 0.02, 40};
    cfg.init = {1, 0};
    models::ColorScene ref;
    ref.temp = 6200.0;
    ref.brightness = 1.1;
    ref.color1 = {0.7, 0.3, 0.4};
    ref.color2 = {0.3, 0.6, 0.5};
    check("color.u", models::color_objective(cfg), models::encode_color_stimulus(ref), 1e-5,
          key.split(2));
  }
  {
    models::TablesExperimentConfig cfg;
    cfg.n_tables = 1;
    cfg.hmc = {120, 30, 0.004, 40};
    cfg.init = {1, 0};
    models::TableScene ref;
    ref.r = 10.0;
    ref.theta = 2.5;
    ref.h = 1.0;
    ref.tables.push_back(models::TableBox{{3.0, 2.0, 2.5}, {0.8, -0.5}});
    check("tables.u", models::tables_objective(cfg), models::encode_tables_stimulus(ref), 1e-5,
          key.split(3));
  }

  *all_ok = true;
  std::printf("%-16s %14s %18s %10s\n", "parameter", "analytic", "finite-difference", "rel-err");
  for (const auto& row : rows) {
    bool checked = row["checked"].get<bool>();
    double rel = row["relative_error"].get<double>();
    if (checked && rel >= 0.05) *all_ok = false;
    std::printf("%-16s %14.6f %18.6f %9.2f%%%s\n", row["parameter"].get<std::string>().c_str(),
                row["analytic"].get<double>(), row["finite_difference"].get<double>(), rel * 100.0,
                checked ? "" : "  (below threshold, skipped)");
  }
  std::printf("gradcheck: %s\n", *all_ok ? "all gradients within 5%" : "FAILED");
  return rows;
}

int run_seed_sweep(const CliOptions& opt) {
  ExperimentSetup setup = apply_overrides(opt);
  fs::create_directories(opt.output_dir);

  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < opt.num_seeds; ++i) seeds.push_back(opt.seed + std::uint64_t(i));

  std::mutex print_mutex;
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    for (;;) {
      int idx = next.fetch_add(1);
      if (idx >= int(seeds.size()) || failed.load()) return;
      std::uint64_t seed = seeds[size_t(idx)];
      fs::path dir = opt.num_seeds == 1 ? fs::path(opt.output_dir)
                                        : fs::path(opt.output_dir) / ("seed-" + std::to_string(seed));
      fs::create_directories(dir);
      try {
        json result = run_experiment(opt, setup, seed, dir);
        std::ofstream out(dir / "result.json");
        out << result.dump(2) << "\n";
        std::lock_guard<std::mutex> lock(print_mutex);
        std::printf("seed %llu: best loss %.6f -> %s\n", (unsigned long long)seed,
                    result["best_loss"].get<double>(), (dir / "result.json").c_str());
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(print_mutex);
        std::fprintf(stderr, "seed %llu failed: %s\n", (unsigned long long)seed, e.what());
        failed.store(true);
      }
    }
  };

  int nworkers = std::max(1, std::min(opt.jobs, int(seeds.size())));
  std::vector<std::thread> threads;
  for (int i = 0; i < nworkers; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return failed.load() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradient-based search for adversarial observations against Bayesian models"};
  app.require_subcommand(1);

  CliOptions opt;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", opt.seed, "base random seed");
    cmd->add_option("--num-seeds", opt.num_seeds, "run this many consecutive seeds")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--jobs", opt.jobs, "parallel workers for multi-seed sweeps")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--output-dir", opt.output_dir, "where result.json and friends go");
    cmd->add_flag("--emit-plots", opt.emit_plots, "also write SVG plots");
    cmd->add_option("--n-samples", opt.n_samples, "HMC samples per inference")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--leapfrog-steps", opt.leapfrog_steps, "leapfrog steps per trajectory")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--eps", opt.eps, "leapfrog step size")->check(CLI::PositiveNumber);
    cmd->add_option("--skip", opt.skip, "burn-in samples to discard")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--gd-steps", opt.gd_steps, "gradient descent steps")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--lr", opt.lr, "gradient descent learning rate")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--momentum", opt.momentum, "gradient descent momentum coefficient")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--max-grad-norm", opt.max_grad_norm, "gradient clipping threshold")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* thermometer = app.add_subcommand("thermometer", "inverse-inverse thermometer solve");
  add_common(thermometer);
  CLI::App* color = app.add_subcommand("color", "color-constancy illusion search");
  add_common(color);
  color->add_option("--lambda-distinct", opt.lambda_distinct,
                    "weight of the color-separation loss term");
  CLI::App* tables = app.add_subcommand("tables", "size-constancy (forced perspective) search");
  add_common(tables);
  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "compare backward gradients against finite differences");
  gradcheck->add_option("--seed", opt.seed, "base random seed");
  gradcheck->add_option("--output-dir", opt.output_dir, "where result.json goes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gradcheck->parsed()) {
      fs::create_directories(opt.output_dir);
      bool ok = false;
      json rows = run_gradcheck(opt.seed, &ok);
      json result;
      result["schema_version"] = kSchemaVersion;
      result["artifact_version"] = kArtifactVersion;
      result["config"] = {{"experiment", "gradcheck"}, {"seed", opt.seed}};
      result["rows"] = rows;
      result["all_ok"] = ok;
      std::ofstream out(fs::path(opt.output_dir) / "result.json");
      out << result.dump(2) << "\n";
      return ok ? 0 : 1;
    }
    opt.experiment = thermometer->parsed() ? "thermometer" : (color->parsed() ? "color" : "tables");
    return run_seed_sweep(opt);
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "sampler divergence: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
