#pragma once

#include "fsse/agreement.hpp"
#include "fsse/system_model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace fsse {

enum class EstimatorMode { fsse, exhaustive, both };

const char* to_string(EstimatorMode mode);
EstimatorMode parse_estimator_mode(std::string_view text);
AgreementMode parse_agreement_mode(std::string_view text);

/// Attack on one sensor: i.i.d. uniform on [lo, hi] each step, or a fixed
/// per-step sequence (one value per step of the horizon).
struct SensorAttack {
    SensorIndex index = 0; ///< zero-based
    bool uniform = true;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> sequence;

    bool operator==(const SensorAttack&) const = default;
};

/// Constant-support sparse attack.
struct AttackScenario {
    std::vector<SensorAttack> sensors;
    std::uint64_t seed = 0;

    SensorSet support() const;
    /// Throws ParseError on duplicate/out-of-range sensors or |support| > s_max.
    void validate(std::size_t p, int s_max, long horizon) const;

    bool operator==(const AttackScenario&) const = default;
};

struct ReferenceSpec {
    std::string kind = "none"; ///< "none" or "sine"
    double amplitude = 0.0;
    double frequency = 0.0; ///< rad/s; the phase is frequency * t * sample_period

    bool operator==(const ReferenceSpec&) const = default;
};

/// u(t) = K x_hat(t) + r(t), with r added to every input channel.
struct ControlSpec {
    Matrix K; ///< m x n
    ReferenceSpec reference;

    Vector input(long t, const Vector& x_hat, double sample_period) const;
};

struct Scenario {
    std::string name;
    double sample_period = 1.0;
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix E; ///< empty means identity
    int tau = 1;
    int s_max = 0;
    double w_bound = 0.0;
    std::vector<double> v_bounds;
    Vector x0;
    long horizon = 0;
    ControlSpec control;
    AttackScenario attack;
    EstimatorMode estimator = EstimatorMode::both;
    AgreementMode agreement = AgreementMode::mean;

    SystemModel model() const;
};

bool operator==(const Scenario& a, const Scenario& b);

/// Parses a scenario document; every violation raises ParseError naming the field.
Scenario parse_scenario(std::string_view text);
std::string serialize_scenario(const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path);

} // namespace fsse
