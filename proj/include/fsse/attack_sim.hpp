#pragma once

#include "fsse/estimator.hpp"
#include "fsse/scenario.hpp"

#include <iosfwd>
#include <random>

namespace fsse {

struct StepOutput {
    Vector x_next;
    Vector y;
};

/// x_next = A x + B u + E d,  y = C x + a + v.
StepOutput step(const SystemModel& model, const Vector& x, const Vector& u, const Vector& d,
                const Vector& v, const Vector& a);

/// Offline data shared by every run of one model: observation stack, noise
/// envelope, partition, candidate solver and bound constants.
class Pipeline {
public:
    Pipeline(SystemModel model, double w_bound, std::vector<double> v_bounds,
             const EquivalenceTolerances& tol = {});
    explicit Pipeline(const Scenario& scenario, const EquivalenceTolerances& tol = {});

    const SystemModel& model() const { return model_; }
    const ObservationStack& stack() const { return stack_; }
    const NoiseBounds& noise() const { return noise_; }
    const Partition& partition() const { return partition_; }
    const CandidateSolver& solver() const { return solver_; }

    double Delta_s() const { return Delta_s_; }
    /// Smallest singular value after removing any 2s sensors; ~0 when the
    /// system is not 2s-sparse observable.
    double delta_2s() const { return delta_2s_; }
    std::optional<double> eta() const { return eta_; }
    double epsilon() const { return epsilon_; }
    bool sparse_observable() const { return sparse_observable_; }

    /// kappa = eta Delta_s (Delta_s without non-singleton types).
    SearchSettings fsse_settings() const;
    /// kappa = Delta_s.
    SearchSettings exhaustive_settings() const;

private:
    SystemModel model_;
    ObservationStack stack_;
    NoiseBounds noise_;
    Partition partition_;
    CandidateSolver solver_;
    double Delta_s_ = 0.0;
    double delta_2s_ = 0.0;
    std::optional<double> eta_;
    double epsilon_ = 0.0;
    bool sparse_observable_ = false;
};

/// Seeded noise and attack draws. Process noise is uniform in the ball of
/// radius w_bound, sensor noise uniform on [-v_i, v_i], uniform attacks i.i.d.
/// on [lo, hi].
class NoiseAttackGenerator {
public:
    NoiseAttackGenerator(const SystemModel& model, double w_bound, std::vector<double> v_bounds,
                         AttackScenario attack);

    Vector process_noise();
    Vector sensor_noise();
    Vector attack(long t);

private:
    int q_;
    std::size_t p_;
    double w_bound_;
    std::vector<double> v_bounds_;
    AttackScenario attack_;
    std::mt19937_64 rng_;
};

/// ||a_hat_j|| = ||T_{rep,j} a_j|| over one window for an attacked member of a
/// non-singleton type.
struct DetectabilityEntry {
    SensorIndex sensor = 0;
    double magnitude = 0.0;
    bool detectable = false;
};

struct WindowRecord {
    long t = 0;             ///< last sample of the window
    Vector x_window_start;  ///< true x(t - tau + 1), the state being estimated
    MeasurementWindow window;

    std::optional<FsseOutcome> fsse;
    std::optional<double> fsse_error;
    double fsse_seconds = 0.0;

    bool exhaustive_run = false;
    std::optional<Estimate> exhaustive;
    std::optional<double> exhaustive_error;
    double exhaustive_seconds = 0.0;

    std::vector<DetectabilityEntry> detectability;
    /// Every attacked member of a non-singleton type exceeds 4 M_T psi_bar.
    bool detectable = false;
};

struct StepRecord {
    long t = 0;
    Vector x;
    Vector u;
    Vector y;
    Vector a;
    Vector x_hat; ///< controller's state estimate at t
    std::optional<std::size_t> window; ///< index into RunTrace::windows
};

struct RunTrace {
    std::string name;
    EstimatorMode mode = EstimatorMode::both;
    AgreementMode agreement = AgreementMode::mean;
    std::uint64_t seed = 0;
    int tau = 0;
    SensorSet attacked;
    std::vector<StepRecord> steps;
    std::vector<WindowRecord> windows;
    double wall_seconds = 0.0;
};

/// Closed loop over `scenario.horizon` steps. A window is formed every step
/// once t >= tau - 1; its estimate of x(t - tau + 1) is propagated to t with
/// the known inputs and fed to the controller. Exhaustion is recorded per
/// window and the previous estimate is propagated instead.
RunTrace run_scenario(const Pipeline& pipeline, const Scenario& scenario);

/// Per-estimator aggregate over the windows of one trace.
struct EstimatorSummary {
    std::size_t windows = 0;
    std::size_t exhausted = 0;
    std::size_t fallbacks = 0;
    double mean_error = 0.0;
    double max_error = 0.0;
    double mean_search_space = 0.0;
    double mean_candidates = 0.0;
    std::size_t bound_violations = 0; ///< only counted when a bound exists
    double seconds = 0.0;
};

EstimatorSummary summarize_fsse(const RunTrace& trace);
EstimatorSummary summarize_exhaustive(const RunTrace& trace);

/// One row per step; column names are listed by trace_csv_header().
std::string trace_csv_header(int n, int m, int p);
void write_trace_csv(std::ostream& out, const RunTrace& trace, int n, int m, int p);
void write_agreement_csv(std::ostream& out, const RunTrace& trace);
std::string summary_json(const RunTrace& trace, const Pipeline& pipeline);

} // namespace fsse
