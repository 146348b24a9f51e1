#include "fsse/system_model.hpp"

#include "fsse/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fsse {

namespace {

std::string shape(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

} // namespace

SystemModel::SystemModel(Matrix A, Matrix B, Matrix C, int tau, int s_max, Matrix E,
                         double sample_period)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), E_(std::move(E)), tau_(tau),
      s_max_(s_max), sample_period_(sample_period) {
    const auto n = A_.rows();
    if (n == 0 || A_.cols() != n) {
        throw DimensionError("A must be square and non-empty, got " + shape(A_));
    }
    if (B_.rows() != n || B_.cols() == 0) {
        throw DimensionError("B must be " + std::to_string(n) + "xm with m >= 1, got " + shape(B_));
    }
    if (C_.cols() != n || C_.rows() == 0) {
        throw DimensionError("C must be px" + std::to_string(n) + " with p >= 1, got " + shape(C_));
    }
    if (E_.size() == 0) {
        E_ = Matrix::Identity(n, n);
    } else if (E_.rows() != n) {
        throw DimensionError("E must have " + std::to_string(n) + " rows, got " + shape(E_));
    }
    if (tau_ < 1 || tau_ > n) {
        throw DimensionError("tau must lie in [1, n], got " + std::to_string(tau_));
    }
    if (s_max_ < 0 || 2 * s_max_ >= C_.rows()) {
        throw DimensionError("s_max must satisfy 0 <= 2*s_max < p, got s_max=" +
                             std::to_string(s_max_) + " p=" + std::to_string(C_.rows()));
    }
    if (!(sample_period_ > 0.0)) {
        throw DimensionError("sample_period must be positive");
    }
}

ObservationStack build_observation_stack(const SystemModel& model, double rank_tol) {
    const int n = model.n();
    const int m = model.m();
    const int q = model.q();
    const int tau = model.tau();

    // powers[k] = A^k for k = 0..tau-1
    std::vector<Matrix> powers;
    powers.reserve(tau);
    powers.push_back(Matrix::Identity(n, n));
    for (int k = 1; k < tau; ++k) {
        powers.push_back(powers.back() * model.A());
    }

    ObservationStack stack;
    stack.tau = tau;
    stack.n = n;
    stack.m = m;
    stack.q = q;
    stack.rank_tol = rank_tol;
    stack.sensors.reserve(model.p());

    for (int i = 0; i < model.p(); ++i) {
        const Eigen::RowVectorXd c = model.C().row(i);
        SensorObservation s;
        s.O.resize(tau, n);
        s.F = Matrix::Zero(tau, tau * m);
        s.G = Matrix::Zero(tau, tau * q);
        for (int r = 0; r < tau; ++r) {
            s.O.row(r) = c * powers[r];
            for (int col = 0; col < r; ++col) {
                const Eigen::RowVectorXd cp = c * powers[r - 1 - col];
                s.F.block(r, col * m, 1, m) = cp * model.B();
                s.G.block(r, col * q, 1, q) = cp * model.E();
            }
        }
        s.rank = linalg::numerical_rank(s.O, rank_tol);
        stack.sensors.push_back(std::move(s));
    }
    return stack;
}

NoiseBounds compute_noise_bounds(const SystemModel& model, const ObservationStack& stack,
                                 double w_bound, std::vector<double> v_bounds) {
    if (!(w_bound >= 0.0)) {
        throw DimensionError("w_bound must be nonnegative");
    }
    if (static_cast<int>(v_bounds.size()) != model.p()) {
        throw DimensionError("v_bounds must have p = " + std::to_string(model.p()) + " entries");
    }
    if (std::any_of(v_bounds.begin(), v_bounds.end(), [](double v) { return !(v >= 0.0); })) {
        throw DimensionError("v_bounds must be nonnegative");
    }

    const double root_tau = std::sqrt(static_cast<double>(stack.tau));
    NoiseBounds nb;
    nb.w_bound = w_bound;
    nb.psi_bar_i.reserve(stack.p());
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < stack.p(); ++i) {
        const double g = w_bound > 0.0 ? linalg::sigma_max(stack.sensors[i].G) : 0.0;
        const double psi = g * root_tau * w_bound + root_tau * v_bounds[i];
        nb.psi_bar_i.push_back(psi);
        sum_sq += psi * psi;
    }
    nb.psi_bar = std::sqrt(sum_sq);
    nb.v_bounds = std::move(v_bounds);
    return nb;
}

MeasurementWindow stack_window(const SystemModel& model, const ObservationStack& stack,
                               std::span<const Vector> raw_history,
                               std::span<const Vector> input_history, long t) {
    const int tau = stack.tau;
    const int p = model.p();
    const int m = model.m();
    if (static_cast<int>(raw_history.size()) != tau || static_cast<int>(input_history.size()) != tau) {
        throw DimensionError("window histories must hold exactly tau = " + std::to_string(tau) +
                             " samples");
    }

    MeasurementWindow w;
    w.t = t;
    w.U.resize(tau * m);
    for (int k = 0; k < tau; ++k) {
        if (input_history[k].size() != m) {
            throw DimensionError("input sample " + std::to_string(k) + " has wrong length");
        }
        if (raw_history[k].size() != p) {
            throw DimensionError("output sample " + std::to_string(k) + " has wrong length");
        }
        w.U.segment(k * m, m) = input_history[k];
    }

    w.raw.resize(p);
    w.Y.resize(p);
    for (int i = 0; i < p; ++i) {
        Vector r(tau);
        for (int k = 0; k < tau; ++k) {
            r(k) = raw_history[k](i);
        }
        w.Y[i] = r - stack.sensors[i].F * w.U;
        w.raw[i] = std::move(r);
    }
    return w;
}

Vector stacked_outputs(const MeasurementWindow& window, const SensorSet& sensors) {
    const Eigen::Index tau = window.Y.empty() ? 0 : window.Y.front().size();
    Vector out(tau * static_cast<Eigen::Index>(sensors.size()));
    for (std::size_t k = 0; k < sensors.size(); ++k) {
        out.segment(static_cast<Eigen::Index>(k) * tau, tau) = window.Y.at(sensors[k]);
    }
    return out;
}

Matrix stacked_observability(const ObservationStack& stack, const SensorSet& sensors) {
    Matrix out(stack.tau * static_cast<Eigen::Index>(sensors.size()), stack.n);
    for (std::size_t k = 0; k < sensors.size(); ++k) {
        out.middleRows(static_cast<Eigen::Index>(k) * stack.tau, stack.tau) = stack.O(sensors[k]);
    }
    return out;
}

SensorSet complement(std::size_t p, const SensorSet& removed) {
    SensorSet keep;
    keep.reserve(p);
    for (SensorIndex i = 0; i < p; ++i) {
        if (!std::binary_search(removed.begin(), removed.end(), i)) {
            keep.push_back(i);
        }
    }
    return keep;
}

} // namespace fsse
