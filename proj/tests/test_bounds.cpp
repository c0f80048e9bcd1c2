#include <doctest.h>

#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "support/oracles.hpp"
#include "udpcert/bounds.hpp"
#include "udpcert/harness.hpp"
#include "udpcert/rng.hpp"

using namespace udpcert;

namespace {

UdpCertificate make_cert(long S0, double kappa0, double Delta) {
  UdpCertificate cert;
  cert.S0 = S0;
  cert.kappa0 = kappa0;
  cert.Delta = Delta;
  cert.provenance = CertProvenance::assumed;
  return cert;
}

Eigen::VectorXd spike_target(long p, double amplitude) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  beta(0) = amplitude;
  return beta;
}

Eigen::VectorXd geometric_target(long p, double first, double decay) {
  Eigen::VectorXd beta(p);
  double value = first;
  for (long i = 0; i < p; ++i) {
    beta(i) = (i % 2 == 0 ? value : -value);
    value *= decay;
  }
  return beta;
}

}  // namespace

TEST_SUITE("bounds") {

TEST_CASE("noise calibration closed forms") {
  const DesignMatrix d = gen_gaussian_design(10, 100, true, 5);
  // Unit columns: the calibration only depends on p, sigma, t.
  const NoiseModel nm = noise_level(d, 1.0, 1.0);
  // Frozen from a high-precision evaluation at p = 100.
  CHECK(nm.lambda0 == doctest::Approx(4.2919320525786945).epsilon(1e-12));
  CHECK(nm.prob_floor == doctest::Approx(0.9981409664667839).epsilon(1e-12));

  const NoiseModel noiseless = noise_level(d, 0.0, 1.0);
  CHECK(noiseless.lambda0 == 0.0);
  CHECK(noiseless.prob_floor == doctest::Approx(nm.prob_floor).epsilon(1e-15));

  // Doubling the maximal column norm doubles lambda0, floor unchanged.
  const DesignMatrix scaled = decompose(2.0 * d.entries());
  const NoiseModel nm2 = noise_level(scaled, 1.0, 1.0);
  CHECK(nm2.lambda0 == doctest::Approx(2.0 * nm.lambda0).epsilon(1e-12));
  CHECK(nm2.prob_floor == doctest::Approx(nm.prob_floor).epsilon(1e-15));

  Eigen::MatrixXd tiny(1, 1);
  tiny << 1.0;
  CHECK_THROWS_AS(noise_level(decompose(tiny), 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(noise_level(d, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(noise_level(d, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("sidak floor is an empirical lower bound") {
  const DesignMatrix d = gen_gaussian_design(50, 50, true, 8);
  const NoiseModel nm = noise_level(d, 1.0, 1.0);
  Rng rng(123);
  long events = 0;
  const long draws = 10000;
  for (long i = 0; i < draws; ++i) {
    const Eigen::VectorXd eps = rng.gaussian_vector(d.n());
    if ((d.entries().transpose() * eps).lpNorm<Eigen::Infinity>() <= nm.lambda0) {
      ++events;
    }
  }
  const double freq = static_cast<double>(events) / static_cast<double>(draws);
  const double floor = std::max(nm.prob_floor, 0.0);
  const double slack = 3.0 * std::sqrt(floor * (1.0 - floor) / static_cast<double>(draws));
  CHECK(freq >= floor - slack);
}

TEST_CASE("l1 bound arithmetic on a 1-sparse target") {
  const Eigen::VectorXd beta = spike_target(12, 5.0);
  OracleBoundReport report =
      l1_bound(beta, make_cert(3, 1.0 / 3.0, 1.0), 6.0, 1.0, Estimator::lasso);
  REQUIRE(report.tuning_ok);
  CHECK(*report.prefactor == doctest::Approx(12.0).epsilon(1e-12));
  CHECK(report.minimizing_s == 1);
  CHECK(*report.bound == doctest::Approx(72.0).epsilon(1e-12));
  CHECK(report.minimizing_subset == std::vector<long>{0});

  report = l1_bound(beta, make_cert(3, 0.2, 1.0), 6.0, 1.0, Estimator::dantzig);
  REQUIRE(report.tuning_ok);
  CHECK(*report.prefactor == doctest::Approx(120.0).epsilon(1e-10));
  CHECK(*report.bound == doctest::Approx(720.0).epsilon(1e-10));
}

TEST_CASE("prediction bound arithmetic") {
  const Eigen::VectorXd beta = spike_target(12, 5.0);
  const OracleBoundReport report =
      pred_bound(beta, make_cert(3, 1.0 / 3.0, 1.0), 6.0, 1.0, Estimator::lasso);
  REQUIRE(report.tuning_ok);
  CHECK(report.minimizing_s == 1);
  CHECK(*report.bound == doctest::Approx(24.0).epsilon(1e-12));

  // With a heavy tail the bound grows like 4 lambda Delta at s = 1.
  Eigen::VectorXd heavy = spike_target(12, 5.0);
  double prev = *pred_bound(heavy, make_cert(1, 0.3, 1.0), 6.0, 1.0, Estimator::lasso).bound;
  for (double delta : {2.0, 4.0, 8.0}) {
    const double value =
        *pred_bound(heavy, make_cert(1, 0.3, delta), 6.0, 1.0, Estimator::lasso).bound;
    CHECK(value > prev);
    prev = value;
  }
}

TEST_CASE("tuning conditions are strict") {
  const Eigen::VectorXd beta = spike_target(10, 2.0);
  const UdpCertificate cert = make_cert(3, 0.3, 1.5);

  // Exactly at the threshold: 1 - lambda0/lambda == 2 kappa0 fails strictly.
  const double threshold = 1.0 / (1.0 - 2.0 * cert.kappa0);
  OracleBoundReport report = l1_bound(beta, cert, threshold, 1.0, Estimator::lasso);
  CHECK(!report.tuning_ok);
  CHECK(!report.bound.has_value());
  CHECK(!report.prefactor.has_value());

  // Slightly above: applies, and the prefactor diverges near the threshold.
  report = l1_bound(beta, cert, threshold * (1.0 + 1e-9), 1.0, Estimator::lasso);
  REQUIRE(report.tuning_ok);
  CHECK(*report.prefactor > 1e6);

  // kappa0 out of range for the Dantzig selector.
  report = l1_bound(beta, make_cert(3, 0.3, 1.5), 100.0, 1.0, Estimator::dantzig);
  CHECK(!report.tuning_ok);

  // Uninformative certificate is an error, not a report.
  CHECK_THROWS_AS(l1_bound(beta, make_cert(0, 0.3, 1.5), 10.0, 1.0, Estimator::lasso),
                  std::runtime_error);
  CHECK_THROWS_AS(l1_bound(beta, cert, 0.0, 1.0, Estimator::lasso),
                  std::invalid_argument);
}

TEST_CASE("minimization matches the exhaustive subset oracle") {
  const Eigen::VectorXd beta = geometric_target(10, 4.0, 0.55);
  const UdpCertificate cert = make_cert(4, 0.2, 1.2);  // inside both ranges
  const double lambda = 3.0;
  const double lambda0 = 0.5;

  for (const Estimator estimator : {Estimator::lasso, Estimator::dantzig}) {
    const OracleBoundReport l1_report = l1_bound(beta, cert, lambda, lambda0, estimator);
    const OracleBoundReport pred_report = pred_bound(beta, cert, lambda, lambda0, estimator);
    REQUIRE(l1_report.tuning_ok);
    REQUIRE(pred_report.tuning_ok);

    double best_l1 = std::numeric_limits<double>::infinity();
    double best_pred = std::numeric_limits<double>::infinity();
    for (long s = 1; s <= cert.S0; ++s) {
      for (const std::vector<long>& subset : oracles::all_subsets(10, s)) {
        double tail = beta.lpNorm<1>();
        for (long i : subset) tail -= std::abs(beta(i));
        const double root_s = std::sqrt(static_cast<double>(s));
        best_l1 = std::min(best_l1,
                           lambda * cert.Delta * cert.Delta * static_cast<double>(s) + tail);
        best_pred = std::min(best_pred, 4.0 * lambda * cert.Delta * root_s +
                                            tail / (cert.Delta * root_s));
      }
    }
    CHECK(*l1_report.bound == doctest::Approx(*l1_report.prefactor * best_l1).epsilon(1e-12));
    CHECK(*pred_report.bound == doctest::Approx(best_pred).epsilon(1e-12));
  }
}

TEST_CASE("top-s subsets minimize the tail for every size") {
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd beta = rng.gaussian_vector(10);
    for (long s = 1; s <= 4; ++s) {
      double best_tail = std::numeric_limits<double>::infinity();
      for (const std::vector<long>& subset : oracles::all_subsets(10, s)) {
        double tail = beta.lpNorm<1>();
        for (long i : subset) tail -= std::abs(beta(i));
        best_tail = std::min(best_tail, tail);
      }
      // The evaluator's size-s entry must reach the same tail.
      const OracleBoundReport report =
          l1_bound(beta, make_cert(s, 0.3, 1.0), 10.0, 1.0, Estimator::lasso);
      const double report_tail =
          report.per_s.back().second - 10.0 * static_cast<double>(s);
      CHECK(report_tail == doctest::Approx(best_tail).epsilon(1e-9));
    }
  }
}

TEST_CASE("prediction bounds coincide for both estimators") {
  const Eigen::VectorXd beta = geometric_target(10, 3.0, 0.6);
  const UdpCertificate cert = make_cert(4, 0.2, 1.4);
  const OracleBoundReport a = pred_bound(beta, cert, 5.0, 0.4, Estimator::lasso);
  const OracleBoundReport b = pred_bound(beta, cert, 5.0, 0.4, Estimator::dantzig);
  REQUIRE(a.tuning_ok);
  REQUIRE(b.tuning_ok);
  CHECK(*a.bound == *b.bound);
  CHECK(a.minimizing_s == b.minimizing_s);
}

TEST_CASE("multiplicative factors") {
  // Frozen from a high-precision evaluation at delta = 2, rho = 0.5, p = 100.
  const MultFactors mf = mult_factors(2.0, 0.5, 50, 100, 1.0);
  CHECK(mf.c_mult == doctest::Approx(17.167728210314778).epsilon(1e-12));
  CHECK(mf.c_mult_prime == doctest::Approx(8.583864105157389).epsilon(1e-12));
  CHECK(mf.c_mult / mf.c_mult_prime == doctest::Approx(2.0).epsilon(1e-12));
  REQUIRE(mf.c_mult_optimal.has_value());
  const double expected_opt =
      100.0 * (1.0 + std::log(2.0)) * std::sqrt(std::log(100.0)) / (50.0 * 0.5);
  CHECK(*mf.c_mult_optimal == doctest::Approx(expected_opt).epsilon(1e-12));
  const double expected_opt_prime =
      std::sqrt(100.0 * std::log(100.0) * (1.0 + std::log(2.0))) /
      (0.5 * std::sqrt(50.0));
  CHECK(*mf.c_mult_prime_optimal == doctest::Approx(expected_opt_prime).epsilon(1e-12));

  // Ratio identity c_mult / c_mult_prime = delta.
  for (double delta : {1.0, 1.7, 3.2}) {
    const MultFactors f = mult_factors(delta, 0.8, 10, 30);
    CHECK(f.c_mult / f.c_mult_prime == doctest::Approx(delta).epsilon(1e-12));
    CHECK(!f.c_mult_optimal.has_value());
  }
  CHECK_THROWS_AS(mult_factors(2.0, 0.0, 10, 30), std::invalid_argument);
  CHECK_THROWS_AS(mult_factors(2.0, 1.0, 1, 30), std::invalid_argument);
}

TEST_CASE("sparsity-level comparison under the random-subspace bound") {
  // With delta from the random-subspace formula at C = 1, S0 agrees with
  // kappa0^2 n / (1 + log(p/n)) up to the floor.
  for (const auto& [n, p] : std::vector<std::pair<long, long>>{
           {18, 20}, {50, 100}, {200, 240}, {64, 64}}) {
    const double delta = gaussian_distortion_bound(n, p, 1.0);
    DistortionEstimate est;
    est.lower = est.upper = delta;
    for (double kappa0 : {0.25, 0.45}) {
      const UdpCertificate cert = udp_from_distortion(est, 1.0, kappa0, p);
      const double target = kappa0 * kappa0 * static_cast<double>(n) /
                            (1.0 + std::log(static_cast<double>(p) / n));
      CHECK(std::abs(static_cast<double>(cert.S0) - target) <= 1.0);
    }
  }
}

TEST_CASE("ideal benchmark identities") {
  const DesignMatrix id = decompose(Eigen::MatrixXd::Identity(6, 6));
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(6);
  beta(0) = 2.0;
  beta(3) = -1.0;
  beta(5) = 0.25;

  IdealBenchmark bench = ideal_benchmark(id, beta, 0.7, {0, 3});
  CHECK(bench.trace_term == doctest::Approx(2.0 * 0.49).epsilon(1e-12));
  CHECK(bench.pred_term == doctest::Approx(2.0 * 0.49).epsilon(1e-12));
  CHECK(bench.l1_benchmark == doctest::Approx(0.7 * 2.0 + 0.25).epsilon(1e-12));
  CHECK(bench.pred_benchmark ==
        doctest::Approx(0.7 * std::sqrt(2.0) + 0.25).epsilon(1e-12));

  bench = ideal_benchmark(id, beta, 0.0, {0, 3});
  CHECK(bench.trace_term == 0.0);
  CHECK(bench.pred_term == 0.0);
  CHECK(bench.l1_benchmark == doctest::Approx(0.25));

  const DesignMatrix d = gen_gaussian_design(20, 30, false, 9);
  const Eigen::VectorXd target = gen_sparse_target(30, 3, 2.0, 10);
  const IdealBenchmark gaussian_bench = ideal_benchmark(d, target, 1.0, {0, 1, 2});
  // Independent route: explicit inverse of the restricted Gram.
  Eigen::MatrixXd sub(20, 3);
  for (int j = 0; j < 3; ++j) sub.col(j) = d.entries().col(j);
  const double trace = (sub.transpose() * sub).inverse().trace();
  CHECK(gaussian_bench.trace_term == doctest::Approx(trace).epsilon(1e-9));

  CHECK_THROWS_AS(ideal_benchmark(id, beta, 1.0, {}), std::invalid_argument);
  CHECK_THROWS_AS(ideal_benchmark(id, beta, 1.0, {0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(ideal_benchmark(id, beta, -1.0, {0}), std::invalid_argument);
}

}  // TEST_SUITE
