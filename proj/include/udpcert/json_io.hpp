#pragma once

#include <json.hpp>

#include "udpcert/bounds.hpp"
#include "udpcert/conditions.hpp"
#include "udpcert/distortion.hpp"
#include "udpcert/harness.hpp"
#include "udpcert/solvers.hpp"

namespace udpcert {

// Field names transliterate the usual symbols (kappa0, Delta, S0, lambda0,
// delta_lower, delta_upper, rho_n) and field order is fixed, so identical
// inputs serialize to identical bytes.
using Json = nlohmann::ordered_json;

Json to_json(const DistortionEstimate& est);
Json to_json(const UdpCertificate& cert);
UdpCertificate certificate_from_json(const Json& j);
Json to_json(const Counterexample& ce);
Json to_json(const ConditionReport& report);
Json to_json(const SolverResult& result);
Json to_json(const NoiseModel& nm);
Json to_json(const OracleBoundReport& report);
Json to_json(const MultFactors& mf);
Json to_json(const IdealBenchmark& bench);
Json to_json(const IdealMonteCarlo& mc);
Json to_json(const TrialRecord& rec);
Json to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const Json& j);
Json to_json(const ExperimentReport& report);

std::string estimator_name(Estimator e);
Estimator estimator_from_name(const std::string& name);

}  // namespace udpcert
