#include "fixtures.hpp"

#include "fsse/attack_sim.hpp"
#include "fsse/estimator.hpp"
#include "fsse/linalg.hpp"
#include "fsse/tables.hpp"

#include <doctest.h>

#include <random>

using namespace fsse;

namespace {

std::vector<SensorSet> removed_sets(const CandidateSet& set) {
    std::vector<SensorSet> out;
    for (const Candidate& c : set.candidates) out.push_back(c.removed);
    return out;
}

/// Window built straight from x, a stacked attack and stacked noise.
MeasurementWindow direct_window(const ObservationStack& stack, const Vector& x,
                                const std::vector<Vector>& extra) {
    MeasurementWindow w;
    for (std::size_t i = 0; i < stack.p(); ++i) w.Y.push_back(stack.O(i) * x + extra[i]);
    w.raw = w.Y;
    return w;
}

AgreementConfig three_inertia_config(bool s13_agrees, bool s46_agrees) {
    return {6, 2, {{0, 2}, {1}, {3, 5}, {4}}, {s13_agrees, true, s46_agrees, true}};
}

} // namespace

TEST_SUITE("estimator") {

TEST_CASE("full search space in lexicographic order") {
    const CandidateSet s62 = build_full_sigma(6, 2);
    CHECK(s62.size() == 15);
    CHECK(s62.candidates.front().removed == SensorSet{0, 1});
    CHECK(s62.candidates[1].removed == SensorSet{0, 2});
    CHECK(s62.candidates.back().removed == SensorSet{4, 5});
    CHECK(removed_sets(build_full_sigma(3, 1)) == std::vector<SensorSet>{{0}, {1}, {2}});
    CHECK(build_full_sigma(10, 2).size() == 45);
    CHECK_THROWS_AS(build_full_sigma(4, 2), DimensionError);
    for (std::size_t k = 0; k < s62.size(); ++k) CHECK(s62.candidates[k].sigma_index == k);
}

TEST_CASE("pruning on published layouts") {
    SUBCASE("triples, first agreeable") {
        const auto row = evaluate_config({6, 2, {{0, 1, 2}, {3, 4, 5}}, {true, false}});
        CHECK(removed_sets(row.pruned) == std::vector<SensorSet>{{3, 4}, {3, 5}, {4, 5}});
    }
    SUBCASE("triples, none agreeable") {
        CHECK(evaluate_config({6, 2, {{0, 1, 2}, {3, 4, 5}}, {false, false}}).pruned.size() == 9);
    }
    SUBCASE("pairs, all agreeable") {
        const auto row = evaluate_config({6, 2, {{0, 1}, {2, 3}, {4, 5}}, {true, true, true}});
        CHECK(removed_sets(row.pruned) == std::vector<SensorSet>{{0, 1}, {2, 3}, {4, 5}});
    }
    SUBCASE("pairs, last failing") {
        const auto row = evaluate_config({6, 2, {{0, 1}, {2, 3}, {4, 5}}, {true, true, false}});
        CHECK(removed_sets(row.pruned) == std::vector<SensorSet>{{4, 5}});
    }
}

TEST_CASE("three-inertia agreement table") {
    using V = std::vector<SensorSet>;
    CHECK(removed_sets(evaluate_config(three_inertia_config(true, true)).pruned) ==
          V{{0, 2}, {1, 4}, {3, 5}});
    CHECK(removed_sets(evaluate_config(three_inertia_config(true, false)).pruned) ==
          V{{1, 3}, {1, 5}, {3, 4}, {3, 5}, {4, 5}});
    CHECK(removed_sets(evaluate_config(three_inertia_config(false, true)).pruned) ==
          V{{0, 1}, {0, 2}, {0, 4}, {1, 2}, {2, 4}});
    CHECK(removed_sets(evaluate_config(three_inertia_config(false, false)).pruned) ==
          V{{0, 3}, {0, 5}, {2, 3}, {2, 5}});
}

TEST_CASE("pruning never grows the search space") {
    for (const AgreementConfig& c : enumerate_configs(7, 2)) {
        const auto row = evaluate_config(c);
        CHECK(row.pruned.size() <= 21);
        std::size_t last = 0;
        for (const Candidate& cand : row.pruned.candidates) {
            CHECK(cand.sigma_index >= last); // order preserved
            last = cand.sigma_index;
        }
    }
}

TEST_CASE("sparse observability degree") {
    const ObservationStack b747 = build_observation_stack(testing::load_fixture("b747.json").model());
    CHECK(sparse_observability_degree(b747, 3) == 3);

    const SystemModel single(Matrix::Identity(1, 1) * 0.5, Matrix::Zero(1, 1), Matrix::Identity(1, 1), 1, 0);
    CHECK(sparse_observability_degree(build_observation_stack(single), 0) == 0);

    // Removing S1, S2 and S3 leaves only relative angles.
    const ObservationStack ti = build_observation_stack(testing::load_fixture("three_inertia.json").model());
    CHECK(sparse_observability_degree(ti, 4) == 2);
}

TEST_CASE("bound constants") {
    SUBCASE("square invertible single sensor") {
        Matrix A(2, 2);
        A << 0.9, 0.2, 0.0, 0.8;
        Matrix C(1, 2);
        C << 1.0, 0.0;
        const ObservationStack stack = build_observation_stack(SystemModel(A, Matrix::Zero(2, 1), C, 2, 0));
        CHECK(max_projector_complement(stack, 0) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("eta is absent without non-singleton types") {
        Partition p;
        CHECK_FALSE(inflation_factor(p).has_value());
        BoundConstants c;
        c.Delta_s = 0.7;
        CHECK(c.fsse_kappa() == 0.7);
    }
    SUBCASE("three-inertia constants against a brute-force oracle") {
        const ObservationStack stack = build_observation_stack(testing::load_fixture("three_inertia.json").model());
        double Delta = 0.0;
        double delta = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < 6; ++a)
            for (std::size_t b = a + 1; b < 6; ++b) {
                const Matrix O = stacked_observability(stack, complement(6, {a, b}));
                Eigen::CompleteOrthogonalDecomposition<Matrix> cod(O);
                cod.setThreshold(1e-10);
                const Matrix P = O * cod.pseudoInverse();
                const Matrix R = Matrix::Identity(O.rows(), O.rows()) - P;
                Delta = std::max(Delta, Eigen::BDCSVD<Matrix>(R).singularValues()(0));
                for (std::size_t c = b + 1; c < 6; ++c)
                    for (std::size_t d = c + 1; d < 6; ++d) {
                        const Matrix O4 = stacked_observability(stack, complement(6, {a, b, c, d}));
                        const auto sv = Eigen::BDCSVD<Matrix>(O4).singularValues();
                        delta = std::min(delta, O4.rows() < O4.cols() ? 0.0 : sv(sv.size() - 1));
                    }
            }
        CHECK(max_projector_complement(stack, 2) == doctest::Approx(Delta).epsilon(1e-9));
        CHECK(min_sparse_singular_value(stack, 4) <= 1e-12);
        CHECK(delta <= 1e-12);
        const Partition part = de_partition(stack);
        CHECK_THROWS_AS(compute_bound_constants(stack, 2, part, 1e-9), ObservabilityError);
        const double eta = *inflation_factor(part);
        CHECK(eta == doctest::Approx(std::sqrt(1 + 16 * std::pow(*part.M_T * *part.m_T, 2))));
    }
}

TEST_CASE("noise-free attack-free search accepts the first candidate exactly") {
    const Scenario s = testing::load_fixture("b747.json");
    const SystemModel model = s.model();
    const ObservationStack stack = build_observation_stack(model);
    const CandidateSolver solver(stack, model.s_max());
    const Vector x = Vector::LinSpaced(4, -1.0, 2.0);
    const MeasurementWindow w = direct_window(stack, x, std::vector<Vector>(4, Vector::Zero(4)));
    const Estimate e = ex_search(solver.full_sigma(), w, solver, {1.0, 0.0, 1e-9, std::nullopt});
    CHECK(e.candidates_evaluated == 1);
    CHECK(e.chosen_gamma == SensorSet{0});
    CHECK((e.x_hat - x).norm() <= 1e-9);
    CHECK_FALSE(e.bound.has_value());
}

TEST_CASE("exhaustion is reported") {
    const ObservationStack stack = build_observation_stack(testing::load_fixture("b747.json").model());
    const CandidateSolver solver(stack, 1);
    std::vector<Vector> extra(4, Vector::Zero(4));
    extra[0] = Vector::Constant(4, 5.0);
    extra[1] = Vector::Constant(4, -7.0); // two attacked sensors exceed s = 1
    const MeasurementWindow w = direct_window(stack, Vector::Ones(4), extra);
    CHECK_THROWS_AS(ex_search(solver.full_sigma(), w, solver, {1.0, 1e-3, 1e-9, std::nullopt}),
                    ExhaustionError);
    CHECK_THROWS_AS(ex_search(CandidateSet{}, w, solver, {}), ExhaustionError);
}

TEST_CASE("bounded noise and sparse attacks stay inside the certified radius") {
    // B747 is (p-1)-sparse observable, so both radii are finite.
    const Scenario s = testing::load_fixture("b747.json");
    const Pipeline pipeline(s);
    const ObservationStack& stack = pipeline.stack();
    REQUIRE(pipeline.sparse_observable());
    const BoundConstants c =
        compute_bound_constants(stack, 1, pipeline.partition(), pipeline.epsilon());
    CHECK(c.delta_2s == doctest::Approx(pipeline.delta_2s()));
    const NoiseBounds& nb = pipeline.noise();
    const int tau = stack.tau;
    const int q = stack.q;

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_int_distribution<int> who(0, 3);
    int checked = 0;
    for (int run = 0; run < 100; ++run) {
        Vector x(4);
        for (int k = 0; k < 4; ++k) x(k) = unit(rng);
        Vector D(tau * q);
        for (int k = 0; k < tau; ++k) {
            Vector d(q);
            for (int j = 0; j < q; ++j) d(j) = unit(rng);
            D.segment(k * q, q) = d * (nb.w_bound * std::abs(unit(rng)) / d.norm());
        }
        const int attacked = who(rng);
        std::vector<Vector> extra;
        for (std::size_t i = 0; i < 4; ++i) {
            Vector V(tau);
            for (int k = 0; k < tau; ++k) V(k) = nb.v_bounds[i] * unit(rng);
            Vector e = stack.sensors[i].G * D + V;
            if (static_cast<int>(i) == attacked)
                for (int k = 0; k < tau; ++k) e(k) += 10.0 * unit(rng);
            extra.push_back(e);
        }
        const MeasurementWindow w = direct_window(stack, x, extra);

        // The candidate removing exactly the attacked sensor passes the guard.
        const Candidate truth{{static_cast<SensorIndex>(attacked)}, static_cast<std::size_t>(attacked)};
        CHECK(pipeline.solver().solve(truth, w).residual <
              pipeline.Delta_s() * nb.psi_bar + pipeline.epsilon());

        const Estimate ex = ex_search(pipeline.solver().full_sigma(), w, pipeline.solver(),
                                      pipeline.exhaustive_settings());
        REQUIRE(ex.bound.has_value());
        CHECK((ex.x_hat - x).norm() <= *ex.bound);

        const Estimate fe = fsse::fsse(pipeline.partition(), w, pipeline.solver(), pipeline.fsse_settings(),
                                 AgreementMode::mean);
        REQUIRE(fe.bound.has_value());
        CHECK((fe.x_hat - x).norm() <= *fe.bound);
        CHECK(fe.candidates_evaluated <= fe.search_space_size);
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("one diamond type of individually observable sensors isolates the attacked sensor") {
    const Scenario s = testing::load_fixture("b747.json");
    const Pipeline pipeline(s);
    REQUIRE(pipeline.partition().types.size() == 1);
    const ObservationStack& stack = pipeline.stack();
    const double big = 100.0 * *pipeline.partition().M_T * pipeline.noise().psi_bar;
    for (int attacked = 0; attacked < 4; ++attacked) {
        std::vector<Vector> extra(4, Vector::Zero(4));
        // choose a so that the transformed attack T a has norm 2 * big
        const Matrix& T = pipeline.partition().types[0].transform(static_cast<SensorIndex>(attacked));
        extra[static_cast<std::size_t>(attacked)] = T.inverse() * Vector::Constant(4, big);
        const MeasurementWindow w = direct_window(stack, Vector::Ones(4), extra);
        const FsseOutcome o = fsse_detailed(pipeline.partition(), w, pipeline.solver(),
                                            pipeline.fsse_settings(), AgreementMode::mean);
        CHECK(o.pruned_size == 1);
        REQUIRE(o.estimate.has_value());
        CHECK(o.estimate->chosen_gamma == SensorSet{static_cast<SensorIndex>(attacked)});
    }
}

TEST_CASE("Case 2 prunes to three candidates and Case 3 to four or five") {
    for (const char* name : {"three_inertia_case2.json", "three_inertia_case3.json"}) {
        CAPTURE(name);
        const Scenario s = testing::load_fixture(name);
        const Pipeline pipeline(s);
        const RunTrace trace = run_scenario(pipeline, s);
        for (const WindowRecord& w : trace.windows) {
            const std::size_t n = w.fsse->pruned_size;
            if (std::string(name) == "three_inertia_case2.json") {
                CHECK(n == 3);
            } else {
                CHECK((n == 4 || n == 5));
            }
            REQUIRE(w.fsse->estimate.has_value());
            CHECK(w.fsse->estimate->candidates_evaluated <= n);
        }
    }
}

TEST_CASE("identical inputs give bit-identical estimates") {
    const Scenario s = testing::load_fixture("three_inertia_case1.json");
    const Pipeline pipeline(s);
    const RunTrace a = run_scenario(pipeline, s);
    const RunTrace b = run_scenario(pipeline, s);
    REQUIRE(a.windows.size() == b.windows.size());
    for (std::size_t k = 0; k < a.windows.size(); ++k) {
        const Estimate& ea = *a.windows[k].fsse->estimate;
        const Estimate& eb = *b.windows[k].fsse->estimate;
        CHECK(ea.chosen_gamma == eb.chosen_gamma);
        CHECK(ea.x_hat == eb.x_hat);
    }
}

}
