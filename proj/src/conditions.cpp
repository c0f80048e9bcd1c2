#include "udpcert/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "udpcert/rng.hpp"

namespace udpcert {

namespace {

constexpr double kViolationSlack = 1e-9;  // float noise must not become a counterexample

std::vector<long> indices_by_magnitude(const Eigen::VectorXd& v) {
  std::vector<long> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), 0L);
  std::stable_sort(order.begin(), order.end(), [&](long a, long b) {
    return std::abs(v(a)) > std::abs(v(b));
  });
  return order;
}

// Mixture sampler shared by the falsifiers: dense Gaussian, kernel-aligned,
// kernel-plus-noise and sparse-spike draws, cycled deterministically.
Eigen::VectorXd sample_candidate(const DesignMatrix& d, Rng& rng, long trial,
                                 long sparse_cap) {
  const Eigen::Index p = d.p();
  const Eigen::Index k = d.kernel_dim();
  const long mode = trial % 4;
  if (mode == 1 && k > 0) {
    return d.kernel_basis() * rng.gaussian_vector(k);
  }
  if (mode == 2 && k > 0) {
    Eigen::VectorXd g = d.kernel_basis() * rng.gaussian_vector(k);
    return g + 0.1 * g.norm() * rng.gaussian_vector(p).normalized();
  }
  if (mode == 3) {
    const long spikes = 1 + static_cast<long>(rng.below(
                                static_cast<std::uint64_t>(std::max(1L, sparse_cap))));
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
    std::vector<long> idx(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), 0L);
    for (long i = 0; i < spikes; ++i) {
      const long j = i + static_cast<long>(rng.below(static_cast<std::uint64_t>(p - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
      g(idx[static_cast<std::size_t>(i)]) = rng.gaussian();
    }
    return g;
  }
  return rng.gaussian_vector(p);
}

double binomial_count(long n, long k) {
  double c = 1.0;
  for (long i = 1; i <= k; ++i) {
    c *= static_cast<double>(n - k + i) / static_cast<double>(i);
    if (c > 1e15) return c;
  }
  return c;
}

bool next_combination(std::vector<long>& comb, long n) {
  const long k = static_cast<long>(comb.size());
  long i = k - 1;
  while (i >= 0 && comb[static_cast<std::size_t>(i)] == n - k + i) --i;
  if (i < 0) return false;
  ++comb[static_cast<std::size_t>(i)];
  for (long j = i + 1; j < k; ++j) {
    comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
  }
  return true;
}

}  // namespace

UdpCertificate udp_from_distortion(const DistortionEstimate& est, double rho_n,
                                   double kappa0, long p) {
  if (!(kappa0 > 0.0 && kappa0 < 0.5)) {
    throw std::invalid_argument("udp_from_distortion: kappa0 must lie in (0, 1/2)");
  }
  if (!(rho_n > 0.0)) {
    throw std::invalid_argument("udp_from_distortion: rho_n must be positive");
  }
  if (!std::isfinite(est.upper)) {
    throw std::invalid_argument("udp_from_distortion: distortion upper bound must be finite");
  }
  if (p < 1) throw std::invalid_argument("udp_from_distortion: p must be positive");

  const double ratio = kappa0 / est.upper;
  UdpCertificate cert;
  // The 1e-9 nudge keeps exact-integer products from landing one below.
  cert.S0 = static_cast<long>(std::floor(ratio * ratio * static_cast<double>(p) + 1e-9));
  cert.kappa0 = kappa0;
  cert.Delta = 2.0 * est.upper / rho_n;
  cert.provenance = CertProvenance::distortion;
  cert.inputs.delta_upper = est.upper;
  cert.inputs.rho_n = rho_n;
  cert.inputs.p = p;
  return cert;
}

double interpolation_check(const DesignMatrix& d, double delta_upper,
                           const Eigen::VectorXd& gamma) {
  if (gamma.size() != d.p()) {
    throw std::invalid_argument("interpolation_check: dimension mismatch");
  }
  const double root_p = std::sqrt(static_cast<double>(d.p()));
  return delta_upper / root_p * gamma.lpNorm<1>() +
         2.0 * delta_upper / smallest_singular(d) * (d.entries() * gamma).norm() -
         gamma.norm();
}

std::optional<Counterexample> udp_falsify(const DesignMatrix& d,
                                          const UdpCertificate& cert,
                                          long budget, std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("udp_falsify: budget must be positive");
  if (cert.S0 <= 0) return std::nullopt;  // vacuous certificate

  const long s_max = std::min<long>(cert.S0, d.p());
  Rng rng(seed);
  for (long trial = 0; trial < budget; ++trial) {
    const Eigen::VectorXd gamma = sample_candidate(d, rng, trial, s_max);
    const double image_norm = (d.entries() * gamma).norm();
    const double l1 = gamma.lpNorm<1>();
    const std::vector<long> order = indices_by_magnitude(gamma);
    double head = 0.0;
    for (long s = 1; s <= s_max; ++s) {
      head += std::abs(gamma(order[static_cast<std::size_t>(s - 1)]));
      const double rhs = cert.Delta * std::sqrt(static_cast<double>(s)) * image_norm +
                         cert.kappa0 * l1;
      if (head > rhs + kViolationSlack) {
        Counterexample ce;
        ce.gamma = gamma;
        ce.subset.assign(order.begin(), order.begin() + s);
        ce.violation = head - rhs;
        return ce;
      }
    }
  }
  return std::nullopt;
}

double rip_constant(const DesignMatrix& d, long S) {
  const long p = d.p();
  if (S < 1 || S > p) throw std::invalid_argument("rip_constant: S out of range");
  const double count = binomial_count(p, S);
  if (count > 2e6) {
    throw std::runtime_error("rip_constant: " + std::to_string(count) +
                             " supports of size " + std::to_string(S) +
                             " exceed the enumeration budget of 2e6");
  }

  // Extreme eigenvalue deviations grow with the support, so size-S supports
  // dominate all smaller ones.
  const Eigen::MatrixXd& X = d.entries();
  std::vector<long> comb(static_cast<std::size_t>(S));
  std::iota(comb.begin(), comb.end(), 0L);
  Eigen::MatrixXd sub(d.n(), S);
  double theta = 0.0;
  do {
    for (long j = 0; j < S; ++j) sub.col(j) = X.col(comb[static_cast<std::size_t>(j)]);
    const Eigen::MatrixXd gram = sub.transpose() * sub;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram,
                                                       Eigen::EigenvaluesOnly);
    theta = std::max(theta, eig.eigenvalues().maxCoeff() - 1.0);
    theta = std::max(theta, 1.0 - eig.eigenvalues().minCoeff());
  } while (next_combination(comb, p));
  return theta;
}

namespace {

double cone_objective(const DesignMatrix& d, const Eigen::VectorXd& gamma,
                      const std::vector<long>& support, ConeKind kind) {
  double head_l1 = 0.0;
  double head_sq = 0.0;
  for (long i : support) {
    head_l1 += std::abs(gamma(i));
    head_sq += gamma(i) * gamma(i);
  }
  if (head_l1 <= 1e-300) return std::numeric_limits<double>::infinity();
  const double image = (d.entries() * gamma).norm();
  if (kind == ConeKind::re) return image / std::sqrt(head_sq);
  return std::sqrt(static_cast<double>(support.size())) * image / head_l1;
}

// Euclidean projection onto the l1 ball of the given radius.
void project_l1_ball(Eigen::VectorXd& v, double radius) {
  if (v.lpNorm<1>() <= radius) return;
  std::vector<double> mags(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(v(i));
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    cumulative += mags[k];
    const double candidate = (cumulative - radius) / static_cast<double>(k + 1);
    if (k + 1 == mags.size() || mags[k + 1] <= candidate) {
      threshold = candidate;
      break;
    }
  }
  v = v.unaryExpr([threshold](double x) {
    const double mag = std::max(std::abs(x) - threshold, 0.0);
    return x >= 0.0 ? mag : -mag;
  });
}

// Rescales the off-support part onto the cone boundary when it pokes out.
void project_to_cone(Eigen::VectorXd& gamma, const std::vector<long>& support,
                     const std::vector<char>& on_support, double c0) {
  double head_l1 = 0.0;
  double tail_l1 = 0.0;
  for (Eigen::Index i = 0; i < gamma.size(); ++i) {
    if (on_support[static_cast<std::size_t>(i)]) {
      head_l1 += std::abs(gamma(i));
    } else {
      tail_l1 += std::abs(gamma(i));
    }
  }
  const double cap = c0 * head_l1;
  if (tail_l1 > cap && tail_l1 > 0.0) {
    const double scale = cap / tail_l1;
    for (Eigen::Index i = 0; i < gamma.size(); ++i) {
      if (!on_support[static_cast<std::size_t>(i)]) gamma(i) *= scale;
    }
  }
}

// Subgradient of the cone objective at gamma (away from ||X gamma|| = 0).
Eigen::VectorXd cone_gradient(const DesignMatrix& d, const Eigen::VectorXd& gamma,
                              const std::vector<long>& support, ConeKind kind) {
  const Eigen::VectorXd image = d.entries() * gamma;
  const double image_norm = std::max(image.norm(), 1e-300);
  const Eigen::VectorXd pull = d.entries().transpose() * (image / image_norm);
  Eigen::VectorXd grad;
  if (kind == ConeKind::re) {
    double head_sq = 0.0;
    for (long i : support) head_sq += gamma(i) * gamma(i);
    const double head_norm = std::max(std::sqrt(head_sq), 1e-300);
    grad = pull / head_norm;
    for (long i : support) {
      grad(i) -= image_norm * gamma(i) / (head_norm * head_norm * head_norm);
    }
  } else {
    double head_l1 = 0.0;
    for (long i : support) head_l1 += std::abs(gamma(i));
    head_l1 = std::max(head_l1, 1e-300);
    const double root_s = std::sqrt(static_cast<double>(support.size()));
    grad = root_s * pull / head_l1;
    for (long i : support) {
      const double sign = gamma(i) > 0.0 ? 1.0 : (gamma(i) < 0.0 ? -1.0 : 0.0);
      grad(i) -= root_s * image_norm * sign / (head_l1 * head_l1);
    }
  }
  return grad;
}

double cone_search_on_support(const DesignMatrix& d, const std::vector<long>& support,
                              double c0, ConeKind kind, int restarts,
                              std::uint64_t seed, std::uint64_t task_base) {
  const Eigen::Index p = d.p();
  const auto s = static_cast<long>(support.size());
  std::vector<char> on_support(static_cast<std::size_t>(p), 0);
  for (long i : support) on_support[static_cast<std::size_t>(i)] = 1;

  // Off-support columns and a Lipschitz constant for the tail block step.
  std::vector<long> tail_index;
  tail_index.reserve(static_cast<std::size_t>(p - s));
  for (long i = 0; i < p; ++i) {
    if (!on_support[static_cast<std::size_t>(i)]) tail_index.push_back(i);
  }
  Eigen::MatrixXd tail_cols(d.n(), p - s);
  for (std::size_t j = 0; j < tail_index.size(); ++j) {
    tail_cols.col(static_cast<Eigen::Index>(j)) = d.entries().col(tail_index[j]);
  }
  double tail_lipschitz = 1.0;
  if (p - s > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        tail_cols.transpose() * tail_cols, Eigen::EigenvaluesOnly);
    tail_lipschitz = std::max(eig.eigenvalues().maxCoeff(), 1e-12);
  }

  // The objective is scale-invariant and the head enters the tail problem
  // linearly, so with the head frozen the optimal tail solves a convex
  // l1-ball-constrained least squares.
  auto tail_block_step = [&](Eigen::VectorXd& gamma) {
    if (p - s == 0) return;
    Eigen::VectorXd head_image = Eigen::VectorXd::Zero(d.n());
    double head_l1 = 0.0;
    for (long i : support) {
      head_image += d.entries().col(i) * gamma(i);
      head_l1 += std::abs(gamma(i));
    }
    Eigen::VectorXd tail(p - s);
    for (std::size_t j = 0; j < tail_index.size(); ++j) {
      tail(static_cast<Eigen::Index>(j)) = gamma(tail_index[j]);
    }
    const double radius = c0 * head_l1;
    for (int it = 0; it < 120; ++it) {
      const Eigen::VectorXd gradient =
          tail_cols.transpose() * (head_image + tail_cols * tail);
      tail -= gradient / tail_lipschitz;
      project_l1_ball(tail, radius);
    }
    for (std::size_t j = 0; j < tail_index.size(); ++j) {
      gamma(tail_index[j]) = tail(static_cast<Eigen::Index>(j));
    }
  };

  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Rng rng(seed + task_base + static_cast<std::uint64_t>(r));
    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(p);
    if (r == 0) {
      for (long i : support) gamma(i) = 1.0;  // equal magnitudes, no tail
    } else if (r == 1 && d.kernel_dim() > 0) {
      // Kernel directions annihilate X; keep one when it is cone-feasible.
      gamma = d.kernel_basis() * rng.gaussian_vector(d.kernel_dim());
      project_to_cone(gamma, support, on_support, c0);
    } else if (r == 2) {
      // Smallest right-singular direction of the restricted design.
      Eigen::MatrixXd sub(d.n(), s);
      for (long j = 0; j < s; ++j) sub.col(j) = d.entries().col(support[static_cast<std::size_t>(j)]);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeFullV);
      const Eigen::VectorXd dir = svd.matrixV().col(s - 1);
      for (long j = 0; j < s; ++j) gamma(support[static_cast<std::size_t>(j)]) = dir(j);
    } else {
      for (long i : support) gamma(i) = rng.gaussian();
      double head_l1 = 0.0;
      for (long i : support) head_l1 += std::abs(gamma(i));
      Eigen::VectorXd tail = rng.gaussian_vector(p);
      for (long i : support) tail(i) = 0.0;
      const double tail_l1 = tail.lpNorm<1>();
      if (tail_l1 > 0.0) {
        tail *= rng.uniform() * c0 * head_l1 / tail_l1;
        gamma += tail;
      }
    }
    double value = cone_objective(d, gamma, support, kind);
    if (!std::isfinite(value)) continue;

    // Projected local descent: adaptive-step subgradient moves on the whole
    // vector alternate with exact convex tail block steps; every iterate
    // stays in the cone, so each evaluation is a valid upper bound.
    for (int round = 0; round < 3 && value > 1e-12; ++round) {
      double step = 0.25;
      for (int it = 0; it < 80 && value > 1e-12; ++it) {
        const Eigen::VectorXd grad = cone_gradient(d, gamma, support, kind);
        const double grad_norm = grad.norm();
        if (grad_norm <= 1e-14) break;
        Eigen::VectorXd proposal = gamma - (step * gamma.norm() / grad_norm) * grad;
        project_to_cone(proposal, support, on_support, c0);
        const double proposal_value = cone_objective(d, proposal, support, kind);
        if (proposal_value < value) {
          value = proposal_value;
          gamma = proposal;
          step = std::min(step * 1.25, 1.0);
        } else {
          step *= 0.5;
          if (step < 1e-10) break;
        }
      }
      Eigen::VectorXd candidate = gamma;
      tail_block_step(candidate);
      const double candidate_value = cone_objective(d, candidate, support, kind);
      if (candidate_value < value) {
        value = candidate_value;
        gamma = candidate;
      }
    }
    double radius = 0.2;
    for (int level = 0; level < 10; ++level) {
      for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::VectorXd proposal = gamma + radius * gamma.norm() * rng.gaussian_vector(p);
        project_to_cone(proposal, support, on_support, c0);
        const double proposal_value = cone_objective(d, proposal, support, kind);
        if (proposal_value < value) {
          value = proposal_value;
          gamma = proposal;
        }
      }
      radius *= 0.5;
    }
    best = std::min(best, value);
  }
  return best;
}

}  // namespace

double cone_constant_estimate(const DesignMatrix& d, long S, double c0,
                              ConeKind kind, int restarts, std::uint64_t seed) {
  const long p = d.p();
  if (S < 1 || S > p) throw std::invalid_argument("cone_constant_estimate: S out of range");
  if (!(c0 > 0.0)) throw std::invalid_argument("cone_constant_estimate: c0 must be positive");
  if (restarts < 1) throw std::invalid_argument("cone_constant_estimate: restarts must be positive");

  constexpr long kSupportCap = 10000;

  // The compatibility objective is not monotone in the support size, so all
  // sizes up to S take part.
  double total = 0.0;
  for (long s = 1; s <= S; ++s) total += binomial_count(p, s);

  double best = std::numeric_limits<double>::infinity();
  std::uint64_t task = 0;
  if (total <= static_cast<double>(kSupportCap)) {
    for (long s = 1; s <= S; ++s) {
      std::vector<long> comb(static_cast<std::size_t>(s));
      std::iota(comb.begin(), comb.end(), 0L);
      do {
        best = std::min(best, cone_search_on_support(d, comb, c0, kind, restarts,
                                                     seed, task * 1000003ULL));
        ++task;
      } while (next_combination(comb, p));
    }
  } else {
    Rng pick(seed ^ 0x5eedULL);
    for (long draw = 0; draw < kSupportCap; ++draw) {
      const long s = 1 + static_cast<long>(pick.below(static_cast<std::uint64_t>(S)));
      std::vector<long> idx(static_cast<std::size_t>(p));
      std::iota(idx.begin(), idx.end(), 0L);
      std::vector<long> comb(static_cast<std::size_t>(s));
      for (long i = 0; i < s; ++i) {
        const long j = i + static_cast<long>(pick.below(static_cast<std::uint64_t>(p - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        comb[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i)];
      }
      std::sort(comb.begin(), comb.end());
      best = std::min(best, cone_search_on_support(d, comb, c0, kind, restarts,
                                                   seed, task * 1000003ULL));
      ++task;
    }
  }
  return best;
}

UdpCertificate udp_from_rip(double theta5s, long S, double kappa0) {
  if (!(theta5s >= 0.0)) throw std::invalid_argument("udp_from_rip: theta_5S must be nonnegative");
  const double sqrt2m1 = std::sqrt(2.0) - 1.0;
  if (!(theta5s < sqrt2m1)) {
    throw std::invalid_argument("udp_from_rip: theta_5S = " + std::to_string(theta5s) +
                                " must be below sqrt(2) - 1");
  }
  if (S < 1) throw std::invalid_argument("udp_from_rip: S must be positive");
  const double q = std::sqrt((1.0 - theta5s) / (1.0 + theta5s));
  const double kappa_min = 1.0 / (1.0 + 2.0 * q);
  if (!(kappa0 > kappa_min && kappa0 < 0.5)) {
    throw std::invalid_argument("udp_from_rip: kappa0 = " + std::to_string(kappa0) +
                                " must lie strictly inside (" + std::to_string(kappa_min) +
                                ", 0.5)");
  }
  const double denom = std::sqrt(1.0 - theta5s) +
                       (kappa0 - 1.0) / (2.0 * kappa0) * std::sqrt(1.0 + theta5s);

  UdpCertificate cert;
  cert.S0 = S;
  cert.kappa0 = kappa0;
  cert.Delta = 1.0 / denom;  // minimal admissible Delta, the tightest downstream bound
  cert.provenance = CertProvenance::rip;
  cert.inputs.theta_5s = theta5s;
  return cert;
}

UdpCertificate udp_from_cone(double constant, long S, double c0, ConeKind kind) {
  if (!(constant > 0.0)) {
    throw std::runtime_error("udp_from_cone: constant is nonpositive, the condition fails");
  }
  if (!(c0 > 0.0)) throw std::invalid_argument("udp_from_cone: c0 must be positive");
  if (S < 1) throw std::invalid_argument("udp_from_cone: S must be positive");

  UdpCertificate cert;
  cert.S0 = S;
  cert.kappa0 = c0;
  cert.Delta = 1.0 / constant;
  cert.provenance =
      kind == ConeKind::re ? CertProvenance::re : CertProvenance::compatibility;
  cert.inputs.cone_constant = constant;
  cert.inputs.c0 = c0;
  return cert;
}

std::optional<Counterexample> h_falsify(const DesignMatrix& d, long S,
                                        double kappa, long budget,
                                        std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("h_falsify: budget must be positive");
  if (!(kappa < 0.5)) throw std::invalid_argument("h_falsify: kappa must be below 1/2");
  if (S < 1 || S > d.p()) throw std::invalid_argument("h_falsify: S out of range");

  const double lambda_hat = d.column_norm_max();
  const long s_max = S;
  Rng rng(seed);
  for (long trial = 0; trial < budget; ++trial) {
    const Eigen::VectorXd gamma = sample_candidate(d, rng, trial, s_max);
    const double image_norm = (d.entries() * gamma).norm();
    const double l1 = gamma.lpNorm<1>();
    // The first right-hand term carries the order S, not the subset size, so
    // a violation here also violates the subset-size reading.
    const double rhs = lambda_hat * static_cast<double>(S) * image_norm + kappa * l1;
    const std::vector<long> order = indices_by_magnitude(gamma);
    double head = 0.0;
    for (long s = 1; s <= s_max; ++s) {
      head += std::abs(gamma(order[static_cast<std::size_t>(s - 1)]));
      if (head > rhs + kViolationSlack) {
        Counterexample ce;
        ce.gamma = gamma;
        ce.subset.assign(order.begin(), order.begin() + s);
        ce.violation = head - rhs;
        return ce;
      }
    }
  }
  return std::nullopt;
}

}  // namespace udpcert
