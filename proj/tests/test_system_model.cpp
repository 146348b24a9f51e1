#include "fixtures.hpp"
#include "support/random_systems.hpp"

#include "fsse/linalg.hpp"
#include "fsse/system_model.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fsse;

TEST_SUITE("system_model") {

TEST_CASE("identity plant stacks each sensor row twice") {
    const SystemModel model(Matrix::Identity(2, 2), Matrix::Zero(2, 1), Matrix::Identity(2, 2), 2, 0);
    const ObservationStack stack = build_observation_stack(model);
    Matrix O1(2, 2), O2(2, 2);
    O1 << 1, 0, 1, 0;
    O2 << 0, 1, 0, 1;
    CHECK(stack.O(0).isApprox(O1));
    CHECK(stack.O(1).isApprox(O2));
    CHECK(stack.sensors[0].rank == 1);
    CHECK(stack.sensors[1].rank == 1);
}

TEST_CASE("noise envelope vanishes without noise") {
    const Scenario s = testing::load_fixture("three_inertia.json");
    const SystemModel model = s.model();
    const ObservationStack stack = build_observation_stack(model);
    const NoiseBounds nb = compute_noise_bounds(model, stack, 0.0, std::vector<double>(6, 0.0));
    for (double v : nb.psi_bar_i) CHECK(v == 0.0);
    CHECK(nb.psi_bar == 0.0);
}

TEST_CASE("sensor-noise envelope matches the box maximum") {
    // Oracle: maximise ||(v(0), v(1))|| over the vertices of [-1,1]^2.
    double oracle = 0.0;
    for (int a : {-1, 1})
        for (int b : {-1, 1}) oracle = std::max(oracle, std::hypot(a, b));

    const SystemModel model(Matrix::Identity(2, 2), Matrix::Zero(2, 1), Matrix::Identity(2, 2), 2, 0);
    const ObservationStack stack = build_observation_stack(model);
    const NoiseBounds nb = compute_noise_bounds(model, stack, 0.0, {1.0, 1.0});
    CHECK(nb.psi_bar_i[0] == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(nb.psi_bar_i[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(nb.psi_bar == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("sampled window noise never leaves the envelope") {
    const Scenario s = testing::load_fixture("three_inertia.json");
    const SystemModel model = s.model();
    const ObservationStack stack = build_observation_stack(model);
    const NoiseBounds nb = compute_noise_bounds(model, stack, s.w_bound, s.v_bounds);

    std::mt19937_64 rng(7);
    const int tau = model.tau();
    const int q = model.q();
    std::vector<double> worst(stack.p(), 0.0);
    for (int sample = 0; sample < 100000; ++sample) {
        Vector D(tau * q);
        for (int k = 0; k < tau; ++k) D.segment(k * q, q) = testing::uniform_ball(rng, q, s.w_bound);
        for (std::size_t i = 0; i < stack.p(); ++i) {
            std::uniform_real_distribution<double> box(-s.v_bounds[i], s.v_bounds[i]);
            Vector V(tau);
            for (int k = 0; k < tau; ++k) V(k) = box(rng);
            const double norm = (stack.sensors[i].G * D + V).norm();
            worst[i] = std::max(worst[i], norm);
        }
    }
    for (std::size_t i = 0; i < stack.p(); ++i) {
        CAPTURE(i);
        CHECK(worst[i] <= nb.psi_bar_i[i]);
        CHECK(worst[i] > 0.1 * nb.psi_bar_i[i]); // the envelope is not vacuous
    }
}

TEST_CASE("zero inputs leave the raw window untouched") {
    const Scenario s = testing::load_fixture("three_inertia.json");
    const SystemModel model = s.model();
    const ObservationStack stack = build_observation_stack(model);
    std::vector<Vector> raw, inputs;
    for (int k = 0; k < model.tau(); ++k) {
        raw.push_back(Vector::LinSpaced(model.p(), k, k + 1.0));
        inputs.push_back(Vector::Zero(model.m()));
    }
    const MeasurementWindow w = stack_window(model, stack, raw, inputs);
    for (std::size_t i = 0; i < stack.p(); ++i) CHECK(w.Y[i].isApprox(w.raw[i]));
}

TEST_CASE("input-compensated window equals O_i x for a clean forward simulation") {
    const Scenario s = testing::load_fixture("three_inertia.json");
    const SystemModel model = s.model();
    const ObservationStack stack = build_observation_stack(model);
    Vector x = s.x0;
    const Vector x_start = x;
    std::vector<Vector> raw, inputs;
    for (int k = 0; k < model.tau(); ++k) {
        const Vector u = Vector::Constant(model.m(), std::sin(0.3 * k) + 0.5);
        raw.push_back(model.C() * x);
        inputs.push_back(u);
        x = model.A() * x + model.B() * u;
    }
    const MeasurementWindow w = stack_window(model, stack, raw, inputs);
    for (std::size_t i = 0; i < stack.p(); ++i) {
        const Vector expected = stack.O(i) * x_start;
        CHECK((w.Y[i] - expected).norm() <= 1e-9 * std::max(1.0, expected.norm()));
    }
}

TEST_CASE("three-inertia sensor ranks") {
    // Mirror symmetry of the plant hides a 2-D antisymmetric mode from S2.
    const ObservationStack stack = build_observation_stack(testing::load_fixture("three_inertia.json").model());
    const std::vector<int> expected{6, 4, 6, 4, 2, 4};
    for (std::size_t i = 0; i < 6; ++i) {
        CAPTURE(i);
        CHECK(stack.sensors[i].rank == expected[i]);
    }
}

TEST_CASE("B747 sensors are individually observable") {
    const ObservationStack stack = build_observation_stack(testing::load_fixture("b747.json").model());
    for (const auto& s : stack.sensors) CHECK(s.rank == 4);
}

TEST_CASE("invalid models are rejected") {
    const Matrix A = Matrix::Identity(2, 2);
    const Matrix B = Matrix::Zero(2, 1);
    const Matrix C = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(SystemModel(A, B, Matrix::Identity(2, 3), 2, 0), DimensionError);
    CHECK_THROWS_AS(SystemModel(A, Matrix::Zero(3, 1), C, 2, 0), DimensionError);
    CHECK_THROWS_AS(SystemModel(A, B, C, 0, 0), DimensionError);
    CHECK_THROWS_AS(SystemModel(A, B, C, 3, 0), DimensionError);
    CHECK_THROWS_AS(SystemModel(A, B, C, 2, 1), DimensionError);
    CHECK_THROWS_AS(SystemModel(A, B, C, 2, -1), DimensionError);
}

TEST_CASE("pseudo-inverse and rank helpers") {
    Matrix m(3, 2);
    m << 1, 2, 2, 4, 3, 6;
    CHECK(linalg::numerical_rank(m) == 1);
    const Matrix pinv = linalg::pseudo_inverse(m);
    CHECK((m * pinv * m).isApprox(m));
    CHECK(linalg::sigma_min(Matrix::Identity(2, 3)) == 0.0);
    CHECK(linalg::sigma_max(2.0 * Matrix::Identity(3, 3)) == doctest::Approx(2.0));
}

}
