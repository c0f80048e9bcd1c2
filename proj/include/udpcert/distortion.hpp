#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "udpcert/linalg.hpp"

namespace udpcert {

enum class DistortionMethod { exact_grid, randomized_witness, trivial };

// Bracket on the kernel distortion
//   delta = sup_{x in ker X, x != 0} sqrt(p) ||x||_2 / ||x||_1,
// which always lies in [1, sqrt(p)]. The witness is a kernel vector whose
// ratio equals `lower`; `upper` is a certified bound for the grid method and
// the trivial sqrt(p) for the randomized search.
struct DistortionEstimate {
  double lower = 1.0;
  double upper = 1.0;
  DistortionMethod method = DistortionMethod::trivial;
  Eigen::VectorXd witness;
  std::optional<double> grid_resolution;
};

// Certified bracket for kernel dimension k in {1, 2, 3}: the minimum of
// z -> ||B z||_1 over the unit sphere in kernel coordinates is bracketed by
// sphere sampling plus the Lipschitz bound |f(z) - f(z')| <= sqrt(p) |z - z'|.
// k = 2 uses uniform angle grids with level doubling (bounds are monotone in
// the level count); k = 3 runs best-first subdivision of latitude/longitude
// boxes seeded with a Fibonacci-sphere incumbent. Refines until
// upper - lower <= tol. A trivial kernel returns delta = 1; k > 3 is refused.
DistortionEstimate distortion_exact(const DesignMatrix& d, double tol);

// Lower bound by multi-restart projected subgradient descent of ||B z||_1 on
// the unit sphere, followed by a shrinking-step polish. Restart r draws its
// start from seed + r, so the result is independent of evaluation order.
// upper is the trivial sqrt(p).
DistortionEstimate distortion_search(const DesignMatrix& d, int restarts,
                                     int iters, std::uint64_t seed);

// C * sqrt(p (1 + log(p/n)) / n): the high-probability distortion of a random
// (p - n)-dimensional subspace, for a user-supplied constant C.
double gaussian_distortion_bound(long n, long p, double C);

}  // namespace udpcert
