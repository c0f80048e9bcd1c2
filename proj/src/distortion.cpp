#include "udpcert/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "udpcert/rng.hpp"

namespace udpcert {

namespace {

constexpr double kPi = 3.14159265358979323846;

double l1_image(const Eigen::MatrixXd& basis, const Eigen::VectorXd& z) {
  return (basis * z).lpNorm<1>();
}

// Projected subgradient steps with geometrically shrinking step sizes. Keeps
// the best point seen; the returned direction never evaluates worse than the
// start. Used both to polish grid minimizers and inside the randomized search.
Eigen::VectorXd polish_direction(const Eigen::MatrixXd& basis, Eigen::VectorXd z,
                                 double step0, int levels, int iters_per_level) {
  Eigen::VectorXd best = z;
  double best_val = l1_image(basis, z);
  double step = step0;
  for (int level = 0; level < levels; ++level) {
    for (int it = 0; it < iters_per_level; ++it) {
      const Eigen::VectorXd image = basis * z;
      const Eigen::VectorXd grad =
          basis.transpose() * image.unaryExpr([](double v) {
            return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
          });
      z -= step * grad;
      const double norm = z.norm();
      if (norm <= 1e-300) {
        z = best;
        continue;
      }
      z /= norm;
      const double val = l1_image(basis, z);
      if (val < best_val) {
        best_val = val;
        best = z;
      }
    }
    z = best;
    step *= 0.5;
  }
  return best;
}

DistortionEstimate trivial_estimate(Eigen::Index p) {
  DistortionEstimate est;
  est.lower = 1.0;
  est.upper = 1.0;
  est.method = DistortionMethod::trivial;
  est.witness = Eigen::VectorXd::Zero(p);
  return est;
}

DistortionEstimate finish_certified(const Eigen::MatrixXd& basis,
                                    const Eigen::VectorXd& best_z,
                                    double m_lower, double polish_step,
                                    double resolution) {
  const double root_p = std::sqrt(static_cast<double>(basis.rows()));
  // Polishing only lowers the attained value, so it tightens the bracket from
  // below while the certified upper side stays put.
  const Eigen::VectorXd z = polish_direction(basis, best_z, polish_step, 44, 6);
  const Eigen::VectorXd witness = basis * z;

  DistortionEstimate est;
  est.method = DistortionMethod::exact_grid;
  est.lower = root_p * witness.norm() / witness.lpNorm<1>();
  est.upper = root_p / m_lower;
  est.witness = witness;
  est.grid_resolution = resolution;
  return est;
}

DistortionEstimate exact_line(const DesignMatrix& d) {
  const Eigen::VectorXd witness = d.kernel_basis().col(0);
  const double root_p = std::sqrt(static_cast<double>(d.p()));
  DistortionEstimate est;
  est.method = DistortionMethod::exact_grid;
  est.lower = root_p * witness.norm() / witness.lpNorm<1>();
  est.upper = est.lower;
  est.witness = witness;
  est.grid_resolution = 0.0;
  return est;
}

// k = 2: uniform angle grids over the half circle with level doubling. The
// grids nest, so the upper bound on the minimum never increases and the
// certified lower bound never decreases as levels are added; running with a
// halved tolerance just continues the same schedule.
DistortionEstimate exact_circle(const DesignMatrix& d, double tol) {
  const Eigen::MatrixXd& basis = d.kernel_basis();
  const double root_p = std::sqrt(static_cast<double>(d.p()));
  constexpr long kMaxPoints = 1L << 25;

  long num = 64;
  double m_upper = std::numeric_limits<double>::infinity();
  double m_lower = 0.0;
  double best_angle = 0.0;
  double resolution = 0.0;

  Eigen::VectorXd z(2);
  for (long level = 0;; ++level) {
    if (level > 0) num *= 2;
    // New points only: at level 0 everything, afterwards the odd indices.
    const long start = (level == 0) ? 0 : 1;
    const long stride = (level == 0) ? 1 : 2;
    for (long i = start; i < num; i += stride) {
      const double angle = kPi * static_cast<double>(i) / static_cast<double>(num);
      z(0) = std::cos(angle);
      z(1) = std::sin(angle);
      const double val = l1_image(basis, z);
      if (val < m_upper) {
        m_upper = val;
        best_angle = angle;
      }
    }
    const double covering = 2.0 * std::sin(kPi / (4.0 * static_cast<double>(num)));
    m_lower = std::max(m_lower, m_upper - root_p * covering);
    resolution = covering;
    if (m_lower > 0.0 && root_p / m_lower - root_p / m_upper <= tol) break;
    if (2 * num > kMaxPoints) {
      throw std::runtime_error(
          "distortion_exact: tolerance unreachable within the grid budget");
    }
  }

  Eigen::VectorXd best_z(2);
  best_z << std::cos(best_angle), std::sin(best_angle);
  return finish_certified(basis, best_z, m_lower,
                          kPi / static_cast<double>(num), resolution);
}

Eigen::VectorXd sphere_point(double theta, double phi) {
  Eigen::VectorXd z(3);
  z << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
      std::cos(theta);
  return z;
}

struct SphereBox {
  double theta_lo, theta_hi, phi_lo, phi_hi;
  double center_val;
  double lower;
  long id;
};

struct BoxOrder {
  bool operator()(const SphereBox& a, const SphereBox& b) const {
    if (a.lower != b.lower) return a.lower > b.lower;
    return a.id > b.id;  // deterministic tie-break
  }
};

// Every point of the box is reachable from its center along a meridian arc of
// at most d_theta/2 followed by a latitude arc of at most sin(theta_c) d_phi/2,
// so that sum bounds the geodesic (hence chordal) distance.
double box_radius(const SphereBox& b) {
  const double theta_c = 0.5 * (b.theta_lo + b.theta_hi);
  const double r = 0.5 * (b.theta_hi - b.theta_lo) +
                   std::sin(theta_c) * 0.5 * (b.phi_hi - b.phi_lo);
  return std::min(r, 2.0);
}

// k = 3: best-first branch and bound over latitude/longitude boxes. A
// Fibonacci sphere sweep provides the initial incumbent; the certified global
// lower bound is the smallest bound in the queue, monotone under best-first
// expansion.
DistortionEstimate exact_sphere(const DesignMatrix& d, double tol) {
  const Eigen::MatrixXd& basis = d.kernel_basis();
  const double root_p = std::sqrt(static_cast<double>(d.p()));
  constexpr long kMaxPops = 4000000;
  constexpr int kFibonacciSeed = 4096;

  double m_upper = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_z = sphere_point(kPi / 2.0, 0.0);

  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  for (int i = 0; i < kFibonacciSeed; ++i) {
    const double cos_theta =
        1.0 - 2.0 * (static_cast<double>(i) + 0.5) / kFibonacciSeed;
    const double theta = std::acos(std::clamp(cos_theta, -1.0, 1.0));
    const double phi = std::fmod(2.0 * kPi * static_cast<double>(i) / golden, 2.0 * kPi);
    const Eigen::VectorXd z = sphere_point(theta, phi);
    const double val = l1_image(basis, z);
    if (val < m_upper) {
      m_upper = val;
      best_z = z;
    }
  }

  std::priority_queue<SphereBox, std::vector<SphereBox>, BoxOrder> queue;
  long next_id = 0;
  auto push_box = [&](double tlo, double thi, double plo, double phi_hi) {
    SphereBox box{tlo, thi, plo, phi_hi, 0.0, 0.0, next_id++};
    const Eigen::VectorXd zc =
        sphere_point(0.5 * (tlo + thi), 0.5 * (plo + phi_hi));
    box.center_val = l1_image(basis, zc);
    if (box.center_val < m_upper) {
      m_upper = box.center_val;
      best_z = zc;
    }
    box.lower = box.center_val - root_p * box_radius(box);
    if (box.lower < m_upper) queue.push(box);  // otherwise it cannot matter
  };

  constexpr int kInitTheta = 8;
  constexpr int kInitPhi = 16;
  for (int i = 0; i < kInitTheta; ++i) {
    for (int j = 0; j < kInitPhi; ++j) {
      push_box(kPi * i / kInitTheta, kPi * (i + 1) / kInitTheta,
               2.0 * kPi * j / kInitPhi, 2.0 * kPi * (j + 1) / kInitPhi);
    }
  }

  double m_lower = 0.0;
  double resolution = 2.0;
  for (long pops = 0;; ++pops) {
    if (queue.empty()) {
      m_lower = std::max(m_lower, m_upper);
      break;
    }
    const SphereBox box = queue.top();
    m_lower = std::max(m_lower, std::min(box.lower, m_upper));
    resolution = box_radius(box);
    if (m_lower > 0.0 && root_p / m_lower - root_p / m_upper <= tol) break;
    if (pops > kMaxPops) {
      throw std::runtime_error(
          "distortion_exact: tolerance unreachable within the subdivision budget");
    }
    queue.pop();
    const double theta_c = 0.5 * (box.theta_lo + box.theta_hi);
    const double d_theta = box.theta_hi - box.theta_lo;
    const double d_phi = box.phi_hi - box.phi_lo;
    if (d_theta >= std::sin(theta_c) * d_phi) {
      push_box(box.theta_lo, theta_c, box.phi_lo, box.phi_hi);
      push_box(theta_c, box.theta_hi, box.phi_lo, box.phi_hi);
    } else {
      const double phi_c = 0.5 * (box.phi_lo + box.phi_hi);
      push_box(box.theta_lo, box.theta_hi, box.phi_lo, phi_c);
      push_box(box.theta_lo, box.theta_hi, phi_c, box.phi_hi);
    }
  }

  return finish_certified(basis, best_z, m_lower, 0.01, resolution);
}

}  // namespace

DistortionEstimate distortion_exact(const DesignMatrix& d, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("distortion_exact: tol must be positive");
  const Eigen::Index k = d.kernel_dim();
  if (k == 0) return trivial_estimate(d.p());
  if (k > 3) {
    throw std::invalid_argument(
        "distortion_exact: kernel dimension above 3, use distortion_search");
  }
  if (k == 1) return exact_line(d);
  if (k == 2) return exact_circle(d, tol);
  return exact_sphere(d, tol);
}

DistortionEstimate distortion_search(const DesignMatrix& d, int restarts,
                                     int iters, std::uint64_t seed) {
  const Eigen::Index k = d.kernel_dim();
  if (k == 0) return trivial_estimate(d.p());
  if (restarts < 1) throw std::invalid_argument("distortion_search: restarts must be positive");
  if (iters < 1) throw std::invalid_argument("distortion_search: iters must be positive");

  const Eigen::MatrixXd& basis = d.kernel_basis();
  const double root_p = std::sqrt(static_cast<double>(d.p()));

  double best_val = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_z;
  for (int r = 0; r < restarts; ++r) {
    Rng rng(seed + static_cast<std::uint64_t>(r));
    Eigen::VectorXd z = rng.gaussian_vector(k);
    double norm = z.norm();
    while (norm <= 1e-12) {
      z = rng.gaussian_vector(k);
      norm = z.norm();
    }
    z /= norm;

    Eigen::VectorXd restart_best = z;
    double restart_val = l1_image(basis, z);
    for (int it = 1; it <= iters; ++it) {
      const double step = 0.1 / std::sqrt(static_cast<double>(it));
      const Eigen::VectorXd image = basis * z;
      const Eigen::VectorXd grad =
          basis.transpose() * image.unaryExpr([](double v) {
            return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
          });
      z -= step * grad;
      norm = z.norm();
      if (norm <= 1e-300) {
        z = restart_best;
        continue;
      }
      z /= norm;
      const double val = l1_image(basis, z);
      if (val < restart_val) {
        restart_val = val;
        restart_best = z;
      }
    }
    const Eigen::VectorXd polished = polish_direction(basis, restart_best, 0.05, 40, 6);
    const double val = l1_image(basis, polished);
    if (val < best_val) {
      best_val = val;
      best_z = polished;
    }
  }

  const Eigen::VectorXd witness = basis * best_z;
  DistortionEstimate est;
  est.method = DistortionMethod::randomized_witness;
  est.lower = root_p * witness.norm() / witness.lpNorm<1>();
  est.upper = root_p;
  est.witness = witness;
  return est;
}

double gaussian_distortion_bound(long n, long p, double C) {
  if (n < 1) throw std::invalid_argument("gaussian_distortion_bound: n must be positive");
  if (p < n) throw std::invalid_argument("gaussian_distortion_bound: requires n <= p");
  if (!(C > 0.0)) throw std::invalid_argument("gaussian_distortion_bound: C must be positive");
  const double dn = static_cast<double>(n);
  const double dp = static_cast<double>(p);
  return C * std::sqrt(dp * (1.0 + std::log(dp / dn)) / dn);
}

}  // namespace udpcert
