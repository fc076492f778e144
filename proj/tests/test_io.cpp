#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fastmc/fastmc.hpp"

using namespace fastmc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fastmc_io_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FASTMC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

template <typename Fn>
std::string error_text(Fn&& fn) {
  try {
    fn();
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

Dataset ou_record(std::size_t n, double h, std::uint64_t seed) {
  const auto model = make_preset({DistributionPreset::Kind::gaussian, 0.0, 1.0});
  const TimeGrid g(0.0, h * static_cast<double>(n - 1), h);
  return Dataset(1, h, simulate_em_path(model, g, std::vector<double>{0.0}, seed, 0));
}

}  // namespace

TEST(PathCsv, RoundTripIsExact) {
  const auto model = make_preset({DistributionPreset::Kind::gaussian, 0.3, 1.7});
  const auto set = simulate_em_paths(model, TimeGrid(0.5, 2.0, 0.1), std::vector<double>{0.3}, 3, 11);
  std::stringstream text;
  csv::write_paths(text, set);
  const auto back = csv::read_paths(text);
  EXPECT_EQ(back.count, 3u);
  EXPECT_EQ(back.dim, 1u);
  EXPECT_EQ(back.grid.points(), set.grid.points());
  EXPECT_EQ(back.values, set.values);
  EXPECT_EQ(back.origin, PathOrigin::euler_maruyama);
}

TEST(PathCsv, SpectralOriginAndTwoComponents) {
  const TimeGrid g(0, 1, 0.25);
  PathSet set{g, 2, 2, PathOrigin::spectral, {}};
  for (std::size_t k = 0; k < 2 * 2 * g.points(); ++k) set.values.push_back(0.1 * static_cast<double>(k) - 1.0 / 3.0);
  std::stringstream text;
  csv::write_paths(text, set);
  EXPECT_NE(text.str().find("path_id,t,xi_1,xi_2"), std::string::npos);
  const auto back = csv::read_paths(text);
  EXPECT_EQ(back.origin, PathOrigin::spectral);
  EXPECT_EQ(back.values, set.values);
}

TEST(PathCsv, MalformedInput) {
  std::istringstream bad("path_id,t,xi_1\n0,0,1\n0,0.1,oops\n");
  EXPECT_NE(error_text([&] { csv::read_paths(bad); }).find("line 3"), std::string::npos);
  std::istringstream empty("");
  EXPECT_THROW(csv::read_paths(empty), InputError);
  std::istringstream grids("path_id,t,xi_1\n0,0,1\n0,0.1,1\n1,0,1\n1,0.2,1\n");
  EXPECT_THROW(csv::read_paths(grids), InputError);
}

TEST(SampleCsv, RoundTrip) {
  const auto s = lhs_normal(3, 5, 4, Placement::uniform_in_stratum);
  std::stringstream text;
  csv::write_samples(text, s);
  const auto back = csv::read_samples(text);
  EXPECT_EQ(back.rows, 3u);
  EXPECT_EQ(back.cols, 5u);
  EXPECT_EQ(back.values, s.values);
  EXPECT_EQ(back.method, SampleMethod::lhs);
  std::istringstream ragged("1,2\n3\n");
  EXPECT_NE(error_text([&] { csv::read_samples(ragged); }).find("line 2"), std::string::npos);
}

TEST(DatasetCsv, RoundTripWithAndWithoutHeader) {
  const Dataset d(2, 0.1, {1, 2, 3, 4, 5, 6});
  std::stringstream text;
  csv::write_dataset(text, d, 3.0);
  const auto back = csv::read_dataset(text);
  EXPECT_EQ(back.dim, 2u);
  EXPECT_NEAR(back.interval, 0.1, 1e-15);
  EXPECT_EQ(back.samples, d.samples);
  std::istringstream bare("0,1.5\n0.5,2.5\n1.0,-1\n");
  const auto b = csv::read_dataset(bare);
  EXPECT_EQ(b.samples, (std::vector<double>{1.5, 2.5, -1}));
  EXPECT_DOUBLE_EQ(b.interval, 0.5);
}

TEST(DatasetCsv, Errors) {
  std::istringstream empty("");
  EXPECT_NE(error_text([&] { csv::read_dataset(empty); }).find("empty"), std::string::npos);
  std::istringstream one("t,x\n0,1\n");
  EXPECT_THROW(csv::read_dataset(one), InputError);
  std::istringstream bad("t,x\n0,1\n1,abc\n2,3\n");
  EXPECT_NE(error_text([&] { csv::read_dataset(bad); }).find("line 3"), std::string::npos);
  std::istringstream uneven("t,x\n0,1\n1,2\n2.5,3\n3,4\n");
  EXPECT_NE(error_text([&] { csv::read_dataset(uneven); }).find("not uniform"), std::string::npos);
  std::istringstream short_row("t,x\n0,1\n1\n");
  EXPECT_THROW(csv::read_dataset(short_row), InputError);
  std::istringstream nan_row("t,x\n0,1\n1,nan\n");
  EXPECT_THROW(csv::read_dataset(nan_row), InputError);
}

TEST(ModelFile, RoundTripPresets) {
  const std::vector<ItoModel> models{make_preset({DistributionPreset::Kind::beta, 2, 3}),
                                     make_preset({DistributionPreset::Kind::laplace, 1, 0.5}), wind_power_model()};
  for (const auto& m : models) {
    const auto back = model_file::from_json(json::parse(model_file::to_json(m).dump()));
    for (double x : {0.1, 0.5, 0.9, 1.4}) {
      const std::vector<double> xi{x};
      EXPECT_EQ(eval_drift(back, xi, 0)[0], eval_drift(m, xi, 0)[0]);
      EXPECT_EQ(eval_diffusion(back, xi, 0)[0], eval_diffusion(m, xi, 0)[0]);
    }
    EXPECT_EQ(back.boundary()[0].kind, m.boundary()[0].kind);
  }
}

TEST(ModelFile, RejectsBadDocuments) {
  const json good = model_file::to_json(wind_power_model());
  json extra = good;
  extra["colour"] = "red";
  EXPECT_NE(error_text([&] { model_file::from_json(extra); }).find("colour"), std::string::npos);
  json wrong_count = good;
  wrong_count["diffusion"].push_back(wrong_count["diffusion"][0]);
  EXPECT_THROW(model_file::from_json(wrong_count), InputError);
  json bad_exp = good;
  bad_exp["drift"][0]["terms"][0]["exp"] = json::array({1, 2});
  EXPECT_THROW(model_file::from_json(bad_exp), InputError);
  json bad_kind = good;
  bad_kind["boundary"][0]["kind"] = "wrap";
  EXPECT_THROW(model_file::from_json(bad_kind), InputError);
  json with_fit = good;
  with_fit["fit"] = {{"converged", true}};
  EXPECT_NO_THROW(model_file::from_json(with_fit));
}

TEST(Config, DefaultsAndOverrides) {
  const auto c = parse_config(json::object());
  EXPECT_EQ(c.preset, "wind");
  EXPECT_EQ(c.N, 21u);
  EXPECT_EQ(c.K, 6u);
  const auto ex = build_experiment(c);
  EXPECT_NEAR(ex.xi0[0], 0.933136, 1e-6);
  EXPECT_EQ(ex.grid.points(), 1201u);

  const auto g = parse_config(json{{"model.preset", "gaussian"}, {"model.a", 2.0}, {"model.b", 0.5},
                                   {"rrf", "endpoint"}, {"grid.T", 1.0}, {"grid.h", 0.1}});
  const auto gx = build_experiment(g);
  EXPECT_EQ(gx.xi0[0], 2.0);
  EXPECT_EQ(gx.rrf(std::vector<double>(11, 4.5), gx.grid), 4.5);
}

TEST(Config, Errors) {
  EXPECT_NE(error_text([] { parse_config(json{{"Nn", 3}}); }).find("unknown key 'Nn'"), std::string::npos);
  EXPECT_NE(error_text([] { parse_config(json{{"model.preset", "cauchy"}}); }).find("model.preset"), std::string::npos);
  EXPECT_THROW(parse_config(json{{"N", 0}}), InputError);
  EXPECT_THROW(parse_config(json{{"N", "ten"}}), InputError);
  EXPECT_THROW(parse_config(json{{"rrf", "external"}}), InputError);
  EXPECT_THROW(parse_config(json::array()), InputError);
  EXPECT_THROW(build_experiment(parse_config(json{{"model.preset", "beta"}, {"model.a", -1.0}})), InputError);
  EXPECT_THROW(build_experiment(parse_config(json{{"window.end", 100.0}})), InputError);
  EXPECT_THROW(build_experiment(parse_config(json{{"xi0", json::array({1.0, 2.0})}})), InputError);
}

TEST(Config, ModelFileResolvesRelativeToConfig) {
  const auto dir = scratch_dir("cfg");
  write_file(dir / "m.json", model_file::to_json(make_preset({DistributionPreset::Kind::gaussian, 1, 1})).dump());
  write_file(dir / "c.json", json{{"model.file", "m.json"}, {"rrf", "endpoint"}, {"xi0", 1.0}}.dump());
  const auto ex = build_experiment(load_config((dir / "c.json").string()));
  EXPECT_DOUBLE_EQ(eval_drift(ex.model, std::vector<double>{3.0}, 0)[0], -2.0);
  fs::remove_all(dir);
}

TEST(Cli, InputErrorsExitTwo) {
  const auto dir = scratch_dir("cli_err");
  write_file(dir / "bad.csv", "t,x\n0,1\n0.1,two\n0.2,3\n");
  write_file(dir / "empty.csv", "");
  write_file(dir / "cfg.json", json{{"model.preset", "weibull"}}.dump());
  write_file(dir / "broken.json", "{\"N\": ");
  EXPECT_EQ(run_cli("identify --data " + (dir / "bad.csv").string() + " --out " + (dir / "m.json").string()), 2);
  EXPECT_EQ(run_cli("identify --data " + (dir / "empty.csv").string() + " --out " + (dir / "m.json").string()), 2);
  EXPECT_EQ(run_cli("identify --data " + (dir / "missing.csv").string() + " --out " + (dir / "m.json").string()), 2);
  EXPECT_EQ(run_cli("run --config " + (dir / "cfg.json").string()), 2);
  EXPECT_EQ(run_cli("run --config " + (dir / "broken.json").string()), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("basis --K 0"), 2);
  fs::remove_all(dir);
}

TEST(Cli, IdentifyRecoversOrnsteinUhlenbeck) {
  const auto dir = scratch_dir("cli_id");
  {
    std::ofstream out(dir / "ou.csv");
    csv::write_dataset(out, ou_record(100000, 0.05, 21));
  }
  ASSERT_EQ(run_cli("identify --data " + (dir / "ou.csv").string() + " --out " + (dir / "m.json").string() +
                    " --report " + (dir / "r.json").string()),
            0);
  const auto model = model_file::load((dir / "m.json").string());
  EXPECT_NEAR(eval_drift(model, std::vector<double>{1.0}, 0)[0] - eval_drift(model, std::vector<double>{0.0}, 0)[0],
              -1.0, 0.1);
  const double s = eval_diffusion(model, std::vector<double>{0.0}, 0)[0];
  EXPECT_NEAR(s * s, 2.0, 0.1);
  const auto rep = model_file::read_json_file((dir / "r.json").string());
  EXPECT_TRUE(rep["converged"].get<bool>());

  EXPECT_EQ(run_cli("validate --data " + (dir / "ou.csv").string() + " --model " + (dir / "m.json").string()), 0);
  EXPECT_EQ(run_cli("validate --data " + (dir / "ou.csv").string() + " --reference " + (dir / "ou.csv").string()), 0);
  EXPECT_EQ(run_cli("validate --data " + (dir / "ou.csv").string()), 2);
  fs::remove_all(dir);
}

TEST(Cli, IdentifyBudgetExhaustedExitsThree) {
  const auto dir = scratch_dir("cli_budget");
  {
    const TimeGrid g(0.0, 4999.0, 1.0);
    std::ofstream out(dir / "wind.csv");
    csv::write_dataset(out, Dataset(1, 1.0, simulate_em_path(wind_power_model(), g, std::vector<double>{0.93}, 2, 0)));
  }
  // the file is still written, flagged as not converged
  ASSERT_EQ(run_cli("identify --data " + (dir / "wind.csv").string() + " --drift-degree 2 --diffusion-degree 2" +
                    " --max-iter 1 --out " + (dir / "m.json").string()),
            3);
  const auto doc = model_file::read_json_file((dir / "m.json").string());
  EXPECT_FALSE(doc["fit"]["converged"].get<bool>());
  fs::remove_all(dir);
}

TEST(Cli, ExternalSimulatorFailureExitsFour) {
  const auto dir = scratch_dir("cli_ext");
  write_file(dir / "cfg.json", json{{"model.preset", "gaussian"}, {"rrf", "external"}, {"rrf.command", "exit 5"},
                                    {"grid.T", 1.0}, {"grid.h", 0.1}, {"N", 3}}
                                   .dump());
  EXPECT_EQ(run_cli("run --config " + (dir / "cfg.json").string() + " --out-dir " + (dir / "o").string()), 4);
  fs::remove_all(dir);
}

TEST(Cli, RunPathsAndBasisWriteFiles) {
  const auto dir = scratch_dir("cli_run");
  write_file(dir / "cfg.json", json{{"model.preset", "gaussian"}, {"rrf", "endpoint"}, {"grid.T", 1.0},
                                    {"grid.h", 0.1}, {"N", 8}, {"K", 3}}
                                   .dump());
  const std::string cfg = (dir / "cfg.json").string();
  ASSERT_EQ(run_cli("run --config " + cfg + " --out-dir " + (dir / "o").string()), 0);
  const auto rep = model_file::read_json_file((dir / "o" / "report.json").string());
  EXPECT_EQ(rep["method"], "fast");
  EXPECT_EQ(rep["K"], 3);
  EXPECT_TRUE(fs::exists(dir / "o" / "prefix.csv"));

  ASSERT_EQ(run_cli("paths --config " + cfg + " --out " + (dir / "p.csv").string() + " --samples " +
                    (dir / "s.csv").string()),
            0);
  std::ifstream pin(dir / "p.csv");
  const auto paths = csv::read_paths(pin);
  EXPECT_EQ(paths.count, 8u);
  EXPECT_EQ(paths.origin, PathOrigin::spectral);
  std::ifstream sin(dir / "s.csv");
  const auto samples = csv::read_samples(sin);
  EXPECT_EQ(samples.rows, 3u);
  EXPECT_EQ(samples.cols, 8u);

  ASSERT_EQ(run_cli("basis --K 3 --T 2 --points 5 --out " + (dir / "b.csv").string()), 0);
  std::ifstream bin(dir / "b.csv");
  std::string header, first;
  std::getline(bin, header);
  std::getline(bin, first);
  EXPECT_EQ(header, "t,m_1,m_2,m_3");
  EXPECT_EQ(csv::split(first).size(), 4u);
  fs::remove_all(dir);
}
