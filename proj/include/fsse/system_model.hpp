#pragma once

#include "fsse/types.hpp"

#include <span>

namespace fsse {

/// Discrete-time LTI plant
///
///   x(t+1) = A x(t) + B u(t) + E d(t)
///   y(t)   = C x(t) + a(t) + v(t)
///
/// observed over sliding windows of tau samples. E defaults to the identity,
/// i.e. the process noise w = d enters every state directly.
class SystemModel {
public:
    SystemModel(Matrix A, Matrix B, Matrix C, int tau, int s_max, Matrix E = Matrix(),
                double sample_period = 1.0);

    const Matrix& A() const { return A_; }
    const Matrix& B() const { return B_; }
    const Matrix& C() const { return C_; }
    const Matrix& E() const { return E_; }

    int n() const { return static_cast<int>(A_.rows()); }
    int m() const { return static_cast<int>(B_.cols()); }
    int p() const { return static_cast<int>(C_.rows()); }
    /// Dimension of the process-noise channel d.
    int q() const { return static_cast<int>(E_.cols()); }
    int tau() const { return tau_; }
    int s_max() const { return s_max_; }
    double sample_period() const { return sample_period_; }

private:
    Matrix A_;
    Matrix B_;
    Matrix C_;
    Matrix E_;
    int tau_;
    int s_max_;
    double sample_period_;
};

/// Per-sensor stacked structures over one window.
struct SensorObservation {
    Matrix O; ///< tau x n, row k is C_i A^k
    Matrix F; ///< tau x tau*m, input convolution (strictly lower block-triangular)
    Matrix G; ///< tau x tau*q, process-noise convolution (strictly lower block-triangular)
    int rank = 0;
};

struct ObservationStack {
    int tau = 0;
    int n = 0;
    int m = 0;
    int q = 0;
    double rank_tol = 1e-10;
    std::vector<SensorObservation> sensors;

    std::size_t p() const { return sensors.size(); }
    const Matrix& O(SensorIndex i) const { return sensors.at(i).O; }
};

ObservationStack build_observation_stack(const SystemModel& model, double rank_tol = 1e-10);

struct NoiseBounds {
    double w_bound = 0.0;
    std::vector<double> v_bounds;
    std::vector<double> psi_bar_i;
    double psi_bar = 0.0;
};

/// Window noise envelope: ||Psi_i|| <= psi_bar_i for every admissible noise
/// sequence with ||d(t)||_2 <= w_bound and |v_i(t)| <= v_bounds[i].
NoiseBounds compute_noise_bounds(const SystemModel& model, const ObservationStack& stack,
                                 double w_bound, std::vector<double> v_bounds);

struct MeasurementWindow {
    long t = 0;                ///< time index of the last sample in the window
    std::vector<Vector> Y;     ///< input-compensated stacked outputs, one tau-vector per sensor
    Vector U;                  ///< stacked inputs u(t-tau+1) .. u(t)
    std::vector<Vector> raw;   ///< stacked raw outputs before compensation
};

/// Builds Y_i = raw_i - F_i U from tau output samples (each length p) and tau
/// input samples (each length m), oldest first.
MeasurementWindow stack_window(const SystemModel& model, const ObservationStack& stack,
                               std::span<const Vector> raw_history,
                               std::span<const Vector> input_history, long t = 0);

/// Concatenates the Y blocks of the given sensors (in order).
Vector stacked_outputs(const MeasurementWindow& window, const SensorSet& sensors);

/// Concatenates the O blocks of the given sensors (in order).
Matrix stacked_observability(const ObservationStack& stack, const SensorSet& sensors);

/// All sensors of a p-sensor system not contained in `removed`.
SensorSet complement(std::size_t p, const SensorSet& removed);

} // namespace fsse
