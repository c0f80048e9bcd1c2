#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "udpcert/distortion.hpp"
#include "udpcert/linalg.hpp"

namespace udpcert {

enum class CertProvenance { distortion, rip, re, compatibility, assumed };

// Source quantities a certificate was derived from, kept so the certificate
// arithmetic can be replayed.
struct CertInputs {
  std::optional<double> delta_upper;
  std::optional<double> rho_n;
  std::optional<double> theta_5s;
  std::optional<double> cone_constant;
  std::optional<double> c0;
  std::optional<long> p;
};

// UDP(S0, kappa0, Delta): for every gamma, every s <= S0 and every subset S
// of size s,  ||gamma_S||_1 <= Delta sqrt(s) ||X gamma||_2 + kappa0 ||gamma||_1.
// S0 = 0 marks an uninformative certificate. Cone-derived certificates may
// carry kappa0 >= 1/2; the bound evaluators enforce the admissible range.
struct UdpCertificate {
  long S0 = 0;
  double kappa0 = 0.0;
  double Delta = 0.0;
  CertProvenance provenance = CertProvenance::assumed;
  CertInputs inputs;
};

struct Counterexample {
  Eigen::VectorXd gamma;
  std::vector<long> subset;   // 0-based, the top-|subset| coordinates of |gamma|
  double violation = 0.0;     // amount by which the inequality fails
};

struct ConditionReport {
  std::optional<double> rip_theta;
  std::optional<double> re_kappa_upper;
  std::optional<double> compat_phi_upper;
  std::optional<Counterexample> udp_counterexample;
  std::optional<Counterexample> h_counterexample;
  long S = 0;
  double c0 = 0.0;
  double kappa = 0.0;
};

// S0 = floor((kappa0 / delta_upper)^2 p), Delta = 2 delta_upper / rho_n.
// S0 may come out 0 (uninformative); that is reported, not an error.
UdpCertificate udp_from_distortion(const DistortionEstimate& est, double rho_n,
                                   double kappa0, long p);

// Signed residual of the interpolation inequality
//   (delta/sqrt(p)) ||g||_1 + (2 delta / rho_n) ||X g||_2 - ||g||_2,
// nonnegative whenever delta_upper dominates the true kernel distortion.
double interpolation_check(const DesignMatrix& d, double delta_upper,
                           const Eigen::VectorXd& gamma);

// Randomized one-sided falsifier. Samples `budget` vectors (Gaussian,
// kernel-aligned and sparse mixtures); for each size s <= S0 the worst subset
// is the s largest coordinates of |gamma|. Returns the first violation by
// more than 1e-9, or nothing. Absence of a counterexample is evidence, not
// proof. S0 = 0 is vacuous and returns nothing.
std::optional<Counterexample> udp_falsify(const DesignMatrix& d,
                                          const UdpCertificate& cert,
                                          long budget, std::uint64_t seed);

// Exact restricted isometry constant theta_S by enumeration of all supports
// of size S (smaller supports are dominated). Refuses when binom(p, S)
// exceeds 2e6, reporting the count.
double rip_constant(const DesignMatrix& d, long S);

enum class ConeKind { re, compatibility };

// Upper estimate of kappa(S, c0) (re) or phi(S, c0) (compatibility): the
// minimum over supports of size <= S and over the cone
// ||gamma_{S^c}||_1 <= c0 ||gamma_S||_1 of
//   ||X gamma||_2 / ||gamma_S||_2          (re)
//   sqrt(|S|) ||X gamma||_2 / ||gamma_S||_1 (compatibility).
// Random feasible points (plus kernel and smallest-singular-direction
// candidates) are refined by projected local descent; every feasible
// evaluation upper-bounds the true constant. Supports are enumerated up to
// 1e4, sampled beyond that. Deterministic given the seed.
double cone_constant_estimate(const DesignMatrix& d, long S, double c0,
                              ConeKind kind, int restarts, std::uint64_t seed);

// RIP(theta_5S) with theta_5S < sqrt(2) - 1 yields UDP(S, kappa0, Delta) with
// the minimal admissible Delta; kappa0 must lie strictly between
// 1 / (1 + 2 sqrt((1-theta)/(1+theta))) and 1/2.
UdpCertificate udp_from_rip(double theta5s, long S, double kappa0);

// RE / Compatibility constant -> UDP(S, c0, 1/constant). Recorded for any
// c0 > 0; the bound evaluators enforce c0 < 1/2 (lasso) or 1/4 (Dantzig).
UdpCertificate udp_from_cone(double constant, long S, double c0, ConeKind kind);

// Falsifier for H_{S,1}(kappa):
//   ||gamma_S||_1 <= lambda_hat S ||X gamma||_2 + kappa ||gamma||_1,
// lambda_hat the largest column norm and S the order parameter.
std::optional<Counterexample> h_falsify(const DesignMatrix& d, long S,
                                        double kappa, long budget,
                                        std::uint64_t seed);

}  // namespace udpcert
