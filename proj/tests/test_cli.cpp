#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nytro/commands.hpp"
#include "nytro/serialize.hpp"

#include <filesystem>
#include <fstream>

using namespace nytro;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path root;
  TempDir() : root(fs::temp_directory_path() / "nytro_cli_test") {
    fs::create_directories(root);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
  std::string operator/(const std::string& name) const { return (root / name).string(); }
};

Json read_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return Json::parse(in);
}

GenerateCommand make_generate(const TempDir& dir, const std::string& prefix,
                              std::uint64_t seed, Index n = 500) {
  GenerateCommand cmd;
  cmd.synthesis.family = SynthesisFamily::geometric;
  cmd.synthesis.n = n;
  cmd.synthesis.d = 4;
  cmd.synthesis.kernel = KernelSpec::gaussian(1.0);
  cmd.synthesis.target_snr = 5.0;
  cmd.synthesis.sigma2 = 0.1;
  cmd.synthesis.seed = seed;
  cmd.out_prefix = dir / prefix;
  return cmd;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("generate writes identical files for identical seeds") {
  TempDir dir;
  CHECK(cmd_generate(make_generate(dir, "a", 7, 60)) == 0);
  CHECK(cmd_generate(make_generate(dir, "b", 7, 60)) == 0);
  CHECK(slurp(dir / "a.libsvm") == slurp(dir / "b.libsvm"));
  CHECK(slurp(dir / "a.problem.json") == slurp(dir / "b.problem.json"));
  CHECK(cmd_generate(make_generate(dir, "c", 8, 60)) == 0);
  CHECK(slurp(dir / "a.libsvm") != slurp(dir / "c.libsvm"));
}

TEST_CASE("select on a synthetic problem with NYTRO reports t* and the curve") {
  TempDir dir;
  REQUIRE(cmd_generate(make_generate(dir, "p", 21)) == 0);

  SelectCommand cmd;
  cmd.data_path = dir / "p.libsvm";
  cmd.kernel = KernelSpec::gaussian(1.0);
  cmd.algo = Algorithm::nytro;
  cmd.protocol.m = 100;
  cmd.protocol.max_iter = 150;
  cmd.protocol.seed = 3;
  cmd.out_path = dir / "sel.json";
  CHECK(cmd_select(cmd) == 0);

  const Json report = read_json(dir / "sel.json");
  CHECK(report.at("algorithm") == "nytro");
  const double t_star = report.at("chosen_hyper").get<double>();
  CHECK(t_star >= 1.0);
  const auto& curve = report.at("validation_curve");
  CHECK(curve.size() == 150);
  double rmse_first = 0.0;
  double rmse_star = 0.0;
  for (const auto& point : curve) {
    if (point.at("hyper").get<double>() == 1.0) rmse_first = point.at("rmse").get<double>();
    if (point.at("hyper").get<double>() == t_star) rmse_star = point.at("rmse").get<double>();
  }
  CHECK(rmse_star <= rmse_first * (1.0 + 1e-12));

  // csv flavor carries the banner
  cmd.format = OutputFormat::csv;
  cmd.out_path = dir / "sel.csv";
  CHECK(cmd_select(cmd) == 0);
  std::ifstream in(dir / "sel.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == kCsvBanner);
}

TEST_CASE("select with a test set reports a finite test RMSE") {
  TempDir dir;
  REQUIRE(cmd_generate(make_generate(dir, "train", 31, 200)) == 0);
  REQUIRE(cmd_generate(make_generate(dir, "test", 32, 50)) == 0);

  SelectCommand cmd;
  cmd.data_path = dir / "train.libsvm";
  cmd.test_path = dir / "test.libsvm";
  cmd.kernel = KernelSpec::gaussian(1.0);
  cmd.algo = Algorithm::nkrls;
  cmd.protocol.m = 60;
  cmd.protocol.lambda_count = 40;
  cmd.protocol.seed = 5;
  cmd.out_path = dir / "sel_nkrls.json";
  CHECK(cmd_select(cmd) == 0);
  const Json report = read_json(dir / "sel_nkrls.json");
  CHECK(report.contains("test_rmse"));
  CHECK(report.at("test_rmse").get<double>() >= 0.0);
  CHECK(report.at("model").at("algorithm_tag") == "nkrls");
}

TEST_CASE("train emits a model usable for prediction") {
  TempDir dir;
  REQUIRE(cmd_generate(make_generate(dir, "t", 41, 80)) == 0);

  TrainCommand cmd;
  cmd.data_path = dir / "t.libsvm";
  cmd.kernel = KernelSpec::gaussian(1.0);
  cmd.algo = Algorithm::krls;
  cmd.lambda = 1e-3;
  cmd.out_path = dir / "model.json";
  CHECK(cmd_train(cmd) == 0);

  const CoefficientModel model = model_from_json(read_json(dir / "model.json"));
  const Dataset data = load_libsvm(dir / "t.libsvm");
  const Vector pred = predict(model, *model.kernel_spec, data.points, data.points);
  CHECK(rmse(pred, data.targets) < 1.0);
}

TEST_CASE("regime with ground truth matches the sidecar SNR") {
  TempDir dir;
  REQUIRE(cmd_generate(make_generate(dir, "r", 51, 120)) == 0);

  RegimeCommand cmd;
  cmd.data_path = dir / "r.libsvm";
  cmd.problem_path = dir / "r.problem.json";
  cmd.kernel = KernelSpec::gaussian(1.0);
  cmd.out_path = dir / "regime.json";
  CHECK(cmd_regime(cmd) == 0);
  const Json profile = read_json(dir / "regime.json");
  CHECK(profile.at("snr").get<double>() == doctest::Approx(5.0).epsilon(1e-9));
  CHECK_FALSE(profile.at("snr_estimated").get<bool>());
  const std::string region = profile.at("region").get<std::string>();
  CHECK((region == "nytro" || region == "nkrls" || region == "krls" ||
         region == "early_stopping"));
}

TEST_CASE("regime without ground truth estimates the SNR") {
  TempDir dir;
  REQUIRE(cmd_generate(make_generate(dir, "e", 61, 100)) == 0);

  RegimeCommand cmd;
  cmd.data_path = dir / "e.libsvm";
  cmd.kernel = KernelSpec::gaussian(1.0);
  cmd.protocol.lambda_count = 30;
  cmd.protocol.seed = 2;
  cmd.out_path = dir / "regime_est.json";
  CHECK(cmd_regime(cmd) == 0);
  const Json profile = read_json(dir / "regime_est.json");
  CHECK(profile.at("snr_estimated").get<bool>());
  CHECK(profile.at("snr").get<double>() > 0.0);
}

TEST_CASE("verify suite failure leaves a replay file") {
  TempDir dir;
  VerifyCommand cmd;
  cmd.suite = "thm1";
  cmd.options.instances = 3;
  cmd.options.corrupt_q = true;
  cmd.out_path = dir / "thm1.csv";
  CHECK(cmd_verify(cmd) == 1);
  CHECK(fs::exists(dir / "thm1.csv"));
  const Json replay = read_json((dir / "thm1.csv") + ".fail.json");
  CHECK(replay.at("failures").size() == 3);
}
