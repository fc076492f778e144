// fastmc command-line interface.
//
// Exit codes: 0 ok, 2 input error, 3 numerical non-convergence,
// 4 simulator failure, 1 anything else.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fastmc/fastmc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitSimulator = 4;

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fastmc::InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw fastmc::InputError("write failed for '" + path.string() + "'");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

fastmc::Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fastmc::InputError("cannot open '" + path + "'");
  try {
    return fastmc::csv::read_dataset(in);
  } catch (const fastmc::InputError& e) {
    throw fastmc::InputError("'" + path + "': " + e.what());
  }
}

fastmc::Experiment experiment_from(const std::string& config_path, int workers) {
  auto cfg = fastmc::load_config(config_path);
  if (workers > 0) cfg.workers = static_cast<std::size_t>(workers);
  return fastmc::build_experiment(cfg);
}

fastmc::StatsReport run_method(const fastmc::Experiment& ex, const std::string& method, std::size_t N,
                               fastmc::RunOptions opts) {
  const auto& c = ex.config;
  if (method == "traditional") return fastmc::run_traditional_mcs(ex.model, ex.rrf, ex.grid, ex.xi0, N, c.seed, opts);
  return fastmc::run_fast_mcs(ex.model, ex.rrf, ex.grid, ex.xi0, N, c.K, c.seed, c.fast, opts);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fastmc: fast Monte Carlo uncertainty assessment with spectral SDE paths"};
  app.require_subcommand(1);
  int workers = 0;

  // identify
  auto* identify = app.add_subcommand("identify", "fit a polynomial Ito model to a sampled record (CSV t,xi_1..)");
  std::string id_data, id_out, id_report;
  int drift_degree = 1, diffusion_degree = 0;
  fastmc::FitOptions fit_opts;
  identify->add_option("--data", id_data, "CSV record with columns t, xi_1..xi_m")->required();
  identify->add_option("--drift-degree", drift_degree, "total degree of each drift polynomial")->capture_default_str();
  identify->add_option("--diffusion-degree", diffusion_degree, "total degree of each diffusion entry")
      ->capture_default_str();
  identify->add_option("--out", id_out, "model file to write")->required();
  identify->add_option("--report", id_report, "fit report (JSON); printed to stdout when omitted");
  identify->add_option("--max-iter", fit_opts.max_iter, "optimizer iteration cap")->capture_default_str();
  identify->add_option("--grad-tol", fit_opts.grad_tol, "gradient tolerance (per increment)")->capture_default_str();
  identify->add_option("--step-tol", fit_opts.step_tol, "relative step tolerance")->capture_default_str();
  identify->add_option("--epsilon", fit_opts.epsilon, "diffusion floor added to sigma sigma^T")->capture_default_str();

  // validate
  auto* validate = app.add_subcommand("validate", "compare a model with a record (KS distance, ACF RMSE)");
  std::string va_model, va_data, va_reference;
  std::size_t lags = 50;
  std::uint64_t va_seed = fastmc::kValidationSeed;
  validate->add_option("--model", va_model, "model file");
  validate->add_option("--data", va_data, "CSV record")->required();
  validate->add_option("--reference", va_reference, "compare against this record instead of a simulation");
  validate->add_option("--lags", lags, "autocorrelation lags")->capture_default_str();
  validate->add_option("--seed", va_seed, "simulation seed");

  // paths
  auto* paths = app.add_subcommand("paths", "write sample paths (EM or spectral) for a config");
  std::string pa_config, pa_out, pa_samples, pa_method;
  std::size_t pa_count = 0;
  paths->add_option("--config", pa_config, "experiment config")->required();
  paths->add_option("--out", pa_out, "path CSV to write")->required();
  paths->add_option("--count", pa_count, "number of paths (default: config N)");
  paths->add_option("--method", pa_method, "traditional or fast (default: config method)")
      ->check(CLI::IsMember({"traditional", "fast"}));
  paths->add_option("--samples", pa_samples, "also write the KLE coefficient design (fast only)");

  // run
  auto* run = app.add_subcommand("run", "run one Monte Carlo method and write its report");
  std::string ru_config, ru_out = "out";
  run->add_option("--config", ru_config, "experiment config")->required();
  run->add_option("--out-dir", ru_out, "directory for report.json and prefix.csv")->capture_default_str();

  // compare
  auto* compare = app.add_subcommand("compare", "run both methods and report convergence-size speedups");
  std::string co_config, co_out = "out";
  compare->add_option("--config", co_config, "experiment config")->required();
  compare->add_option("--out-dir", co_out, "directory for compare.json and prefix CSVs")->capture_default_str();

  // basis
  auto* basis = app.add_subcommand("basis", "tabulate the KLE cosine basis on [0, T]");
  std::size_t ba_K = 6, ba_points = 101;
  double ba_T = 1.0;
  std::string ba_out;
  basis->add_option("--K", ba_K, "number of basis functions")->capture_default_str();
  basis->add_option("--T", ba_T, "horizon")->capture_default_str();
  basis->add_option("--points", ba_points, "number of sample times")->capture_default_str();
  basis->add_option("--out", ba_out, "CSV file (stdout when omitted)");

  for (auto* sub : {paths, run, compare}) {
    sub->add_option("--workers", workers, "worker threads (overrides config; results do not depend on it)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*identify) {
      const auto data = load_dataset(id_data);
      const auto spec = fastmc::BasisSpec::uniform(data.dim, drift_degree, diffusion_degree);
      const auto result = fastmc::fit(data, spec, fit_opts);
      write_text(id_out, dump(fastmc::report::fitted_model_json(result)));
      const std::string rep = dump(fastmc::report::to_json(result));
      if (id_report.empty()) std::cout << rep;
      else write_text(id_report, rep);
      if (!result.converged) {
        std::cerr << "identify: optimizer did not converge (gradient norm " << result.gradient_norm << ")\n";
        return kExitNumerical;
      }
      if (result.degenerate) std::cerr << "identify: diffusion estimate is at the epsilon floor\n";
      return 0;
    }
    if (*validate) {
      const auto data = load_dataset(va_data);
      fastmc::ValidationReport rep;
      if (!va_reference.empty()) {
        rep = fastmc::compare_records(data, load_dataset(va_reference), lags);
      } else {
        if (va_model.empty()) throw fastmc::InputError("validate: --model or --reference is required");
        rep = fastmc::validate(fastmc::model_file::load(va_model), data, lags, va_seed);
      }
      std::cout << dump(fastmc::report::to_json(rep));
      return 0;
    }
    if (*paths) {
      const auto ex = experiment_from(pa_config, workers);
      const auto& c = ex.config;
      const std::string method = pa_method.empty() ? c.method : pa_method;
      const std::size_t count = pa_count > 0 ? pa_count : c.N;
      std::ostringstream text;
      if (method == "traditional") {
        fastmc::csv::write_paths(text, fastmc::simulate_em_paths(ex.model, ex.grid, ex.xi0, count, c.seed, c.workers));
      } else {
        fastmc::csv::write_paths(
            text, fastmc::simulate_spectral_paths(ex.model, ex.grid, ex.xi0, count, c.K, c.seed, c.fast, c.workers));
        if (!pa_samples.empty()) {
          std::ostringstream st;
          fastmc::csv::write_samples(st, fastmc::fast_design(c.K * ex.model.noise_dim(), count, c.seed, c.fast));
          write_text(pa_samples, st.str());
        }
      }
      write_text(pa_out, text.str());
      return 0;
    }
    if (*run) {
      const auto ex = experiment_from(ru_config, workers);
      const auto rep = run_method(ex, ex.config.method, ex.config.N, ex.run_options());
      std::ostringstream prefix;
      fastmc::report::write_prefix_csv(prefix, rep);
      write_text(fs::path(ru_out) / "report.json", dump(fastmc::report::to_json(rep)));
      write_text(fs::path(ru_out) / "prefix.csv", prefix.str());
      std::cout << "mean " << fastmc::csv::format_number(rep.final_mean) << "\nvariance "
                << fastmc::csv::format_number(rep.final_variance) << "\n";
      return 0;
    }
    if (*compare) {
      const auto ex = experiment_from(co_config, workers);
      const auto& c = ex.config;
      auto trad_opts = ex.run_options();
      trad_opts.rerun_from = c.compare_traditional_from.value_or(c.compare_traditional_N > 4 ? c.compare_traditional_N - 4 : 1);
      auto fast_opts = ex.run_options();
      fast_opts.rerun_from = c.compare_fast_from;
      const auto trad = run_method(ex, "traditional", c.compare_traditional_N, trad_opts);
      const auto fast = run_method(ex, "fast", c.compare_fast_N, fast_opts);
      const auto cm = fastmc::compare_methods(trad, fast, fastmc::Statistic::mean);
      const auto cv = fastmc::compare_methods(trad, fast, fastmc::Statistic::variance);
      json out = {{"traditional", fastmc::report::to_json(trad)},
                  {"fast", fastmc::report::to_json(fast)},
                  {"mean", fastmc::report::to_json(cm)},
                  {"variance", fastmc::report::to_json(cv)}};
      std::ostringstream pt, pf;
      fastmc::report::write_prefix_csv(pt, trad);
      fastmc::report::write_prefix_csv(pf, fast);
      write_text(fs::path(co_out) / "compare.json", dump(out));
      write_text(fs::path(co_out) / "traditional.csv", pt.str());
      write_text(fs::path(co_out) / "fast.csv", pf.str());
      for (const auto* r : {&cm, &cv}) {
        std::cout << (r == &cm ? "mean" : "variance") << ": target " << fastmc::csv::format_number(r->target_degree)
                  << " N_A " << r->N_A << " N_B ";
        if (r->reached) std::cout << r->N_B << " speedup " << fastmc::csv::format_number(r->speedup) << "\n";
        else std::cout << "not reached\n";
      }
      return 0;
    }
    if (*basis) {
      if (ba_points < 2) throw fastmc::InputError("basis: --points must be >= 2");
      fastmc::KleConfig{ba_K, ba_T, 1}.validate();
      std::ostringstream text;
      text << "t";
      for (std::size_t j = 1; j <= ba_K; ++j) text << ",m_" << j;
      text << "\n";
      for (std::size_t k = 0; k < ba_points; ++k) {
        const double t = k + 1 == ba_points ? ba_T : ba_T * static_cast<double>(k) / static_cast<double>(ba_points - 1);
        text << fastmc::csv::format_number(t);
        for (std::size_t j = 1; j <= ba_K; ++j) text << ',' << fastmc::csv::format_number(fastmc::kle_basis(j, t, ba_T));
        text << "\n";
      }
      if (ba_out.empty()) std::cout << text.str();
      else write_text(ba_out, text.str());
      return 0;
    }
  } catch (const fastmc::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fastmc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fastmc::SimulatorError& e) {
    std::cerr << "simulator error: " << e.what() << "\n";
    return kExitSimulator;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
