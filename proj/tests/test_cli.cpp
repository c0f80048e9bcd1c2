#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/oracles.hpp"
#include "udpcert/cli.hpp"
#include "udpcert/harness.hpp"
#include "udpcert/json_io.hpp"

using namespace udpcert;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("udpcert_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int value = 0;
    return value;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << m(i, j) << (j + 1 < m.cols() ? "," : "");
    }
    out << "\n";
  }
}

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun result;
  result.code = run_cli(args, out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

std::string schema_path(const std::string& name) {
  return std::string(UDPCERT_SCHEMA_DIR) + "/" + name;
}

void check_schema(const std::string& schema_file, const std::string& doc_text) {
  const nlohmann::json schema = oracles::load_json_file(schema_path(schema_file));
  const std::string mismatch =
      oracles::schema_mismatch(schema, nlohmann::json::parse(doc_text));
  CHECK_MESSAGE(mismatch.empty(), mismatch);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("parse_args accepts the documented forms") {
  const CliConfig certify = parse_args(
      {"certify", "--matrix", "X.csv", "--method", "exact", "--tol", "1e-4"});
  CHECK(certify.subcommand == Subcommand::certify);
  CHECK(certify.matrix_path == "X.csv");
  CHECK(certify.method == "exact");
  CHECK(certify.tol == doctest::Approx(1e-4));

  const CliConfig conditions = parse_args(
      {"conditions", "--matrix", "X.csv", "--rip-S", "2", "--re-S", "2", "--c0",
       "1.0", "--falsify-budget", "100000", "--seed", "7"});
  CHECK(conditions.subcommand == Subcommand::conditions);
  CHECK(conditions.rip_S == 2);
  CHECK(conditions.falsify_budget == 100000);
  CHECK(conditions.seed == 7);
}

TEST_CASE("parse_args rejects bad usage with distinct messages") {
  CHECK_THROWS_WITH_AS(
      parse_args({"solve", "--matrix", "X.csv", "--response", "y.csv",
                  "--method", "lasso", "--lambda", "-1"}),
      doctest::Contains("lambda"), UsageError);
  CHECK_THROWS_WITH_AS(parse_args({"frobnicate"}), doctest::Contains("frobnicate"),
                       UsageError);
  CHECK_THROWS_WITH_AS(
      parse_args({"certify", "--matrix", "X.csv", "--unknown-flag", "3"}),
      doctest::Contains("unknown-flag"), UsageError);
  CHECK_THROWS_WITH_AS(parse_args({"certify"}), doctest::Contains("matrix"),
                       UsageError);
  CHECK_THROWS_WITH_AS(
      parse_args({"certify", "--matrix", "X.csv", "--tol", "abc"}),
      doctest::Contains("tol"), UsageError);
  CHECK_THROWS_WITH_AS(
      parse_args({"bound", "--matrix", "X.csv", "--target", "b.csv", "--cert",
                  "c.json", "--sigma", "1", "--lambda", "fast"}),
      doctest::Contains("lambda"), UsageError);
}

TEST_CASE("environment variable supplies the default seed") {
  ::setenv("UDP_CERTIFY_SEED", "4242", 1);
  const CliConfig with_env = parse_args({"certify", "--matrix", "X.csv"});
  CHECK(with_env.seed == 4242);
  const CliConfig overridden =
      parse_args({"certify", "--matrix", "X.csv", "--seed", "9"});
  CHECK(overridden.seed == 9);
  ::setenv("UDP_CERTIFY_SEED", "not-a-number", 1);
  CHECK_THROWS_AS(parse_args({"certify", "--matrix", "X.csv"}), UsageError);
  ::unsetenv("UDP_CERTIFY_SEED");
  const CliConfig bare = parse_args({"certify", "--matrix", "X.csv"});
  CHECK(bare.seed == 0);
}

TEST_CASE("help is available") {
  const CliConfig top = parse_args({"--help"});
  CHECK(top.help_requested);
  CHECK(top.help_text.find("certify") != std::string::npos);
  const CliConfig sub = parse_args({"solve", "--help"});
  CHECK(sub.help_requested);
  CHECK(sub.help_text.find("--lambda") != std::string::npos);
}

TEST_CASE("certify pipeline emits a schema-conforming document") {
  TempDir dir;
  write_matrix_csv(dir.file("X.csv"), Eigen::MatrixXd::Identity(3, 3));
  const CliRun trivial = run({"certify", "--matrix", dir.file("X.csv")});
  CHECK(trivial.code == 0);
  CHECK(trivial.err.find("trivial") != std::string::npos);
  check_schema("distortion_estimate.schema.json", trivial.out);
  CHECK(trivial.json().at("delta_lower") == 1.0);

  const DesignMatrix d = gen_gaussian_design(8, 10, false, 3);
  write_matrix_csv(dir.file("G.csv"), d.entries());
  const CliRun exact = run({"certify", "--matrix", dir.file("G.csv"), "--method",
                            "exact", "--tol", "1e-4"});
  CHECK(exact.code == 0);
  check_schema("distortion_estimate.schema.json", exact.out);
  const Json doc = exact.json();
  CHECK(doc.at("method") == "exact_grid");
  CHECK(doc.at("delta_upper").get<double>() - doc.at("delta_lower").get<double>() <=
        1e-4);

  const CliRun chained =
      run({"certify", "--matrix", dir.file("G.csv"), "--method", "exact", "--tol",
           "1e-4", "--to-udp", "--kappa0", "0.45"});
  CHECK(chained.code == 0);
  check_schema("certify_udp.schema.json", chained.out);
  CHECK(chained.json().at("udp_certificate").at("provenance") == "distortion");

  const CliRun searched = run({"certify", "--matrix", dir.file("G.csv"),
                               "--method", "search", "--restarts", "16",
                               "--seed", "7"});
  CHECK(searched.code == 0);
  check_schema("distortion_estimate.schema.json", searched.out);
  CHECK(searched.json().at("method") == "randomized_witness");
}

TEST_CASE("certify refuses to certify a rank-deficient design") {
  TempDir dir;
  Eigen::MatrixXd x(2, 3);
  x << 1.0, 2.0, 0.0,
       2.0, 4.0, 0.0;  // rank 1
  write_matrix_csv(dir.file("X.csv"), x);
  const CliRun r = run({"certify", "--matrix", dir.file("X.csv"), "--to-udp",
                        "--kappa0", "0.4"});
  CHECK(r.code == 1);
  CHECK(r.err.find("rank-deficient") != std::string::npos);
}

TEST_CASE("solve pipeline") {
  TempDir dir;
  write_matrix_csv(dir.file("X.csv"), Eigen::MatrixXd::Identity(3, 3));
  Eigen::MatrixXd y(3, 1);
  y << 3.0, -0.5, 1.0;
  write_matrix_csv(dir.file("y.csv"), y);

  for (const std::string method : {"lasso", "dantzig"}) {
    const CliRun r = run({"solve", "--matrix", dir.file("X.csv"), "--response",
                          dir.file("y.csv"), "--method", method, "--lambda", "1.0"});
    CHECK(r.code == 0);
    check_schema("solver_result.schema.json", r.out);
    const Json doc = r.json();
    CHECK(doc.at("status") == "converged");
    CHECK(doc.at("estimate").at(0).get<double>() == doctest::Approx(2.0).epsilon(1e-8));
  }

  const CliRun missing = run({"solve", "--matrix", dir.file("X.csv"),
                              "--response", dir.file("missing.csv"), "--method",
                              "lasso", "--lambda", "1.0"});
  CHECK(missing.code == 1);
}

TEST_CASE("conditions pipeline") {
  TempDir dir;
  write_matrix_csv(dir.file("X.csv"), Eigen::MatrixXd::Identity(6, 6));
  const CliRun r = run({"conditions", "--matrix", dir.file("X.csv"), "--rip-S",
                        "2", "--re-S", "2", "--c0", "0.3", "--restarts", "8",
                        "--falsify-budget", "2000", "--seed", "7"});
  CHECK(r.code == 0);
  check_schema("condition_report.schema.json", r.out);
  const Json doc = r.json();
  CHECK(doc.at("rip_theta").get<double>() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(doc.at("re_kappa_upper").get<double>() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(doc.at("udp_counterexample").is_null());
  CHECK(doc.at("h_counterexample").is_null());
}

TEST_CASE("bound pipeline and exit code 3") {
  TempDir dir;
  const DesignMatrix d = gen_gaussian_design(18, 20, false, 2);
  write_matrix_csv(dir.file("X.csv"), d.entries());
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(20, 1);
  beta(0, 0) = 5.0;
  write_matrix_csv(dir.file("beta.csv"), beta);

  Json cert;
  cert["S0"] = 2;
  cert["kappa0"] = 0.45;
  cert["Delta"] = 8.0;
  cert["provenance"] = "assumed";
  cert["inputs"] = Json::object();
  {
    std::ofstream f(dir.file("cert.json"));
    f << cert.dump();
  }

  const CliRun auto_run =
      run({"bound", "--matrix", dir.file("X.csv"), "--target", dir.file("beta.csv"),
           "--cert", dir.file("cert.json"), "--sigma", "0.05", "--t", "1",
           "--lambda", "auto", "--estimator", "lasso"});
  CHECK(auto_run.code == 0);
  check_schema("oracle_bound_report.schema.json", auto_run.out);
  const Json doc = auto_run.json();
  CHECK(doc.at("tuning_ok") == true);
  CHECK(doc.at("bound").is_number());

  // A lambda below the admissibility threshold must fail with exit 3.
  const double lambda0 = doc.at("lambda0").get<double>();
  const double below = 0.99 * lambda0 / (1.0 - 2.0 * 0.45);
  const CliRun failed =
      run({"bound", "--matrix", dir.file("X.csv"), "--target", dir.file("beta.csv"),
           "--cert", dir.file("cert.json"), "--sigma", "0.05", "--t", "1",
           "--lambda", std::to_string(below), "--estimator", "lasso"});
  CHECK(failed.code == 3);
  CHECK(failed.json().at("tuning_ok") == false);
  CHECK(failed.json().at("bound").is_null());

  const CliRun pred =
      run({"bound", "--matrix", dir.file("X.csv"), "--target", dir.file("beta.csv"),
           "--cert", dir.file("cert.json"), "--sigma", "0.05", "--t", "1",
           "--lambda", "auto", "--estimator", "lasso", "--kind", "pred"});
  CHECK(pred.code == 0);
  CHECK(pred.json().at("theorem") == "lasso_pred");
}

TEST_CASE("ideal pipeline") {
  TempDir dir;
  write_matrix_csv(dir.file("X.csv"), Eigen::MatrixXd::Identity(4, 4));
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(4, 1);
  beta(1, 0) = 3.0;
  beta(2, 0) = -1.0;
  write_matrix_csv(dir.file("beta.csv"), beta);

  const CliRun r = run({"ideal", "--matrix", dir.file("X.csv"), "--target",
                        dir.file("beta.csv"), "--sigma", "1.0", "--support",
                        "1,2", "--trials", "2000", "--seed", "3"});
  CHECK(r.code == 0);
  check_schema("ideal_report.schema.json", r.out);
  const Json doc = r.json();
  CHECK(doc.at("benchmark").at("trace_term").get<double>() == doctest::Approx(2.0));
  CHECK(doc.at("monte_carlo").at("rel_dev_est").get<double>() <= 0.2);
}

TEST_CASE("experiment pipeline is byte-deterministic") {
  TempDir dir;
  Json config;
  config["n"] = 18;
  config["p"] = 20;
  config["s"] = 1;
  config["sigma"] = 0.05;
  config["t"] = 1.0;
  config["kappa0"] = 0.45;
  config["lambda_rule"] = 1.01;
  config["estimator"] = "lasso";
  config["trials"] = 20;
  config["seed"] = 12;
  config["certificate_source"] = "exact";
  {
    std::ofstream f(dir.file("exp.json"));
    f << config.dump();
  }

  const std::vector<std::string> args{"experiment", "--config", dir.file("exp.json"),
                                      "--dump-trials", dir.file("trials.csv")};
  const CliRun first = run(args);
  CHECK(first.code == 0);
  check_schema("experiment_report.schema.json", first.out);
  const CliRun second = run(args);
  CHECK(first.out == second.out);

  const Json doc = first.json();
  CHECK(doc.at("violations") == 0);
  // The config echo round-trips to an equal config.
  const ExperimentConfig parsed = experiment_config_from_json(doc.at("config"));
  const ExperimentConfig original = experiment_config_from_json(config);
  CHECK(parsed == original);

  // Trial dump exists with a header plus one line per trial.
  std::ifstream trials(dir.file("trials.csv"));
  REQUIRE(trials.good());
  std::string line;
  long lines = 0;
  while (std::getline(trials, line)) ++lines;
  CHECK(lines == 21);
}

TEST_CASE("header lines are skipped on request") {
  TempDir dir;
  {
    std::ofstream f(dir.file("X.csv"));
    f << "a,b,c\n1,0,0\n0,1,0\n0,0,1\n";
  }
  CHECK(run({"certify", "--matrix", dir.file("X.csv")}).code == 1);  // unparsable
  const CliRun ok = run({"certify", "--matrix", dir.file("X.csv"), "--header"});
  CHECK(ok.code == 0);
  CHECK(ok.json().at("delta_lower") == 1.0);
}

TEST_CASE("output lands in --out with nothing on stdout") {
  TempDir dir;
  write_matrix_csv(dir.file("X.csv"), Eigen::MatrixXd::Identity(3, 3));
  const CliRun r = run({"certify", "--matrix", dir.file("X.csv"), "--out",
                        dir.file("est.json"), "--pretty"});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  const nlohmann::json doc = oracles::load_json_file(dir.file("est.json"));
  CHECK(doc.at("delta_lower") == 1.0);
}

}  // TEST_SUITE
