#include "fsse/attack_sim.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace fsse {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

} // namespace

StepOutput step(const SystemModel& model, const Vector& x, const Vector& u, const Vector& d,
                const Vector& v, const Vector& a) {
    if (x.size() != model.n() || u.size() != model.m() || d.size() != model.q() ||
        v.size() != model.p() || a.size() != model.p()) {
        throw DimensionError("step: inconsistent vector sizes");
    }
    StepOutput out;
    out.x_next = model.A() * x + model.B() * u + model.E() * d;
    out.y = model.C() * x + a + v;
    return out;
}

Pipeline::Pipeline(SystemModel model, double w_bound, std::vector<double> v_bounds,
                   const EquivalenceTolerances& tol)
    : model_(std::move(model)),
      stack_(build_observation_stack(model_, tol.rank_tol)),
      noise_(compute_noise_bounds(model_, stack_, w_bound, std::move(v_bounds))),
      partition_(de_partition(stack_, tol)),
      solver_(stack_, model_.s_max()) {
    const int s = model_.s_max();
    Delta_s_ = max_projector_complement(stack_, s);
    sparse_observable_ = sparse_observability_degree(stack_, 2 * s) >= 2 * s;
    delta_2s_ = min_sparse_singular_value(stack_, 2 * s);
    eta_ = inflation_factor(partition_);
    epsilon_ = default_epsilon(noise_.psi_bar);
}

Pipeline::Pipeline(const Scenario& scenario, const EquivalenceTolerances& tol)
    : Pipeline(scenario.model(), scenario.w_bound, scenario.v_bounds, tol) {}

SearchSettings Pipeline::fsse_settings() const {
    SearchSettings s;
    s.kappa = eta_ ? *eta_ * Delta_s_ : Delta_s_;
    s.psi_bar = noise_.psi_bar;
    s.epsilon = epsilon_;
    if (sparse_observable_) {
        s.delta_2s = delta_2s_;
    }
    return s;
}

SearchSettings Pipeline::exhaustive_settings() const {
    SearchSettings s = fsse_settings();
    s.kappa = Delta_s_;
    return s;
}

NoiseAttackGenerator::NoiseAttackGenerator(const SystemModel& model, double w_bound,
                                           std::vector<double> v_bounds, AttackScenario attack)
    : q_(model.q()),
      p_(static_cast<std::size_t>(model.p())),
      w_bound_(w_bound),
      v_bounds_(std::move(v_bounds)),
      attack_(std::move(attack)),
      rng_(attack_.seed) {}

Vector NoiseAttackGenerator::process_noise() {
    // Uniform in the q-ball: Gaussian direction, radius w * U^(1/q).
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector dir(q_);
    for (int k = 0; k < q_; ++k) {
        dir(k) = normal(rng_);
    }
    const double norm = dir.norm();
    const double radius = w_bound_ * std::pow(unit(rng_), 1.0 / q_);
    if (norm == 0.0) {
        return Vector::Zero(q_);
    }
    return dir * (radius / norm);
}

Vector NoiseAttackGenerator::sensor_noise() {
    Vector v(static_cast<Eigen::Index>(p_));
    for (std::size_t i = 0; i < p_; ++i) {
        std::uniform_real_distribution<double> dist(-v_bounds_[i], v_bounds_[i]);
        v(static_cast<Eigen::Index>(i)) = v_bounds_[i] > 0.0 ? dist(rng_) : 0.0;
    }
    return v;
}

Vector NoiseAttackGenerator::attack(long t) {
    Vector a = Vector::Zero(static_cast<Eigen::Index>(p_));
    for (const SensorAttack& s : attack_.sensors) {
        double value = 0.0;
        if (s.uniform) {
            std::uniform_real_distribution<double> dist(s.lo, s.hi);
            value = s.lo == s.hi ? s.lo : dist(rng_);
        } else {
            value = s.sequence.at(static_cast<std::size_t>(t));
        }
        a(static_cast<Eigen::Index>(s.index)) = value;
    }
    return a;
}

RunTrace run_scenario(const Pipeline& pipeline, const Scenario& scenario) {
    const SystemModel& model = pipeline.model();
    const int tau = model.tau();
    if (scenario.horizon < tau) {
        throw Error("horizon must be at least tau");
    }
    const auto start = Clock::now();

    RunTrace trace;
    trace.name = scenario.name;
    trace.mode = scenario.estimator;
    trace.agreement = scenario.agreement;
    trace.seed = scenario.attack.seed;
    trace.tau = tau;
    trace.attacked = scenario.attack.support();
    trace.steps.reserve(static_cast<std::size_t>(scenario.horizon));

    NoiseAttackGenerator gen(model, scenario.w_bound, scenario.v_bounds, scenario.attack);
    const SearchSettings fsse_settings = pipeline.fsse_settings();
    const SearchSettings exh_settings = pipeline.exhaustive_settings();
    const Partition& partition = pipeline.partition();
    const double detect_threshold =
        4.0 * partition.M_T.value_or(1.0) * pipeline.noise().psi_bar;

    std::vector<Vector> ys;
    std::vector<Vector> us;
    std::vector<Vector> xs;
    std::vector<Vector> as;
    Vector x = scenario.x0;
    Vector x_hat = Vector::Zero(model.n());

    for (long t = 0; t < scenario.horizon; ++t) {
        const Vector a = gen.attack(t);
        const Vector v = gen.sensor_noise();
        const Vector d = gen.process_noise();

        StepRecord rec;
        rec.t = t;
        rec.x = x;
        rec.a = a;
        rec.y = model.C() * x + a + v;
        xs.push_back(x);
        ys.push_back(rec.y);
        as.push_back(a);

        // x_hat stays zero until the first window.
        if (t >= tau - 1) {
            const std::size_t first = static_cast<std::size_t>(t - tau + 1);
            std::vector<Vector> inputs(us.begin() + static_cast<long>(first), us.end());
            inputs.push_back(Vector::Zero(model.m())); // u(t) is not known yet; F ignores it
            const std::span<const Vector> raw(ys.data() + first, static_cast<std::size_t>(tau));

            WindowRecord w;
            w.t = t;
            w.x_window_start = xs[first];
            w.window = stack_window(model, pipeline.stack(), raw, inputs, t);

            if (scenario.estimator != EstimatorMode::exhaustive) {
                const auto t0 = Clock::now();
                w.fsse = fsse_detailed(partition, w.window, pipeline.solver(), fsse_settings,
                                       scenario.agreement);
                w.fsse_seconds = seconds_since(t0);
                if (w.fsse->estimate) {
                    w.fsse_error = (w.fsse->estimate->x_hat - w.x_window_start).norm();
                }
            }
            if (scenario.estimator != EstimatorMode::fsse) {
                w.exhaustive_run = true;
                const auto t0 = Clock::now();
                try {
                    w.exhaustive = ex_search(pipeline.solver().full_sigma(), w.window,
                                             pipeline.solver(), exh_settings);
                } catch (const ExhaustionError&) {
                    w.exhaustive.reset();
                }
                w.exhaustive_seconds = seconds_since(t0);
                if (w.exhaustive) {
                    w.exhaustive_error = (w.exhaustive->x_hat - w.x_window_start).norm();
                }
            }

            // Detectability of each attacked member of a non-singleton type.
            w.detectable = true;
            for (const SensorType& type : partition.types) {
                if (type.size() < 2) {
                    continue;
                }
                for (SensorIndex j : type.members) {
                    if (!std::binary_search(trace.attacked.begin(), trace.attacked.end(), j)) {
                        continue;
                    }
                    Vector aj(tau);
                    for (int k = 0; k < tau; ++k) {
                        aj(k) = as[first + static_cast<std::size_t>(k)](static_cast<Eigen::Index>(j));
                    }
                    DetectabilityEntry e;
                    e.sensor = j;
                    e.magnitude = (type.transform(j) * aj).norm();
                    e.detectable = e.magnitude > detect_threshold;
                    w.detectable = w.detectable && e.detectable;
                    w.detectability.push_back(e);
                }
            }

            const Estimate* driver = nullptr;
            if (scenario.estimator == EstimatorMode::exhaustive) {
                driver = w.exhaustive ? &*w.exhaustive : nullptr;
            } else if (w.fsse->estimate) {
                driver = &*w.fsse->estimate;
            }
            if (driver) {
                x_hat = driver->x_hat;
                for (std::size_t k = first; k < static_cast<std::size_t>(t); ++k) {
                    x_hat = model.A() * x_hat + model.B() * us[k];
                }
            } else if (t > 0) {
                x_hat = model.A() * x_hat + model.B() * us.back();
            }
            rec.window = trace.windows.size();
            trace.windows.push_back(std::move(w));
        }

        rec.x_hat = x_hat;
        rec.u = scenario.control.input(t, x_hat, model.sample_period());
        us.push_back(rec.u);
        x = model.A() * x + model.B() * rec.u + model.E() * d;
        trace.steps.push_back(std::move(rec));
    }
    trace.wall_seconds = seconds_since(start);
    return trace;
}

namespace {

template <class Fn>
EstimatorSummary summarize(const RunTrace& trace, Fn&& pick) {
    EstimatorSummary s;
    std::size_t with_estimate = 0;
    double err_sum = 0.0;
    double space_sum = 0.0;
    double cand_sum = 0.0;
    for (const WindowRecord& w : trace.windows) {
        if (!pick(w, s, with_estimate, err_sum, space_sum, cand_sum)) {
            continue;
        }
        ++s.windows;
    }
    if (with_estimate > 0) {
        s.mean_error = err_sum / static_cast<double>(with_estimate);
    }
    if (s.windows > 0) {
        s.mean_search_space = space_sum / static_cast<double>(s.windows);
        s.mean_candidates = cand_sum / static_cast<double>(s.windows);
    }
    return s;
}

} // namespace

EstimatorSummary summarize_fsse(const RunTrace& trace) {
    return summarize(trace, [](const WindowRecord& w, EstimatorSummary& s, std::size_t& n,
                               double& err, double& space, double& cand) {
        if (!w.fsse) {
            return false;
        }
        const FsseOutcome& o = *w.fsse;
        s.seconds += w.fsse_seconds;
        space += static_cast<double>(o.pruned_size);
        s.fallbacks += o.fell_back_to_full ? 1 : 0;
        if (o.estimate) {
            ++n;
            err += *w.fsse_error;
            s.max_error = std::max(s.max_error, *w.fsse_error);
            cand += static_cast<double>(o.estimate->candidates_evaluated);
            if (o.estimate->bound && *w.fsse_error > *o.estimate->bound) {
                ++s.bound_violations;
            }
        } else {
            ++s.exhausted;
            // every candidate of the searched set was evaluated
            cand += static_cast<double>(o.fell_back_to_full ? 0 : o.pruned_size);
        }
        return true;
    });
}

EstimatorSummary summarize_exhaustive(const RunTrace& trace) {
    return summarize(trace, [](const WindowRecord& w, EstimatorSummary& s, std::size_t& n,
                               double& err, double& space, double& cand) {
        if (!w.exhaustive_run) {
            return false;
        }
        s.seconds += w.exhaustive_seconds;
        if (w.exhaustive) {
            ++n;
            err += *w.exhaustive_error;
            s.max_error = std::max(s.max_error, *w.exhaustive_error);
            space += static_cast<double>(w.exhaustive->search_space_size);
            cand += static_cast<double>(w.exhaustive->candidates_evaluated);
            if (w.exhaustive->bound && *w.exhaustive_error > *w.exhaustive->bound) {
                ++s.bound_violations;
            }
        } else {
            ++s.exhausted;
        }
        return true;
    });
}

namespace {

std::string gamma_label(const SensorSet& gamma) {
    std::string out;
    for (SensorIndex i : gamma) {
        if (!out.empty()) {
            out += ';';
        }
        out += "S" + std::to_string(i + 1);
    }
    return out;
}

void estimate_columns(std::ostream& out, const std::string& prefix, int n) {
    for (int k = 1; k <= n; ++k) {
        out << ',' << prefix << "xhat" << k;
    }
    out << ',' << prefix << "error," << prefix << "residual," << prefix << "search_space,"
        << prefix << "candidates," << prefix << "gamma," << prefix << "kappa," << prefix
        << "bound";
}

void estimate_values(std::ostream& out, const Estimate* e, std::optional<double> error,
                     std::optional<std::size_t> search_space, int n) {
    if (!e) {
        for (int k = 0; k < n; ++k) {
            out << ',';
        }
        out << ',';
        out << ',';
        out << ',';
        if (search_space) {
            out << *search_space;
        }
        out << ",,,,";
        return;
    }
    for (int k = 0; k < n; ++k) {
        out << ',' << e->x_hat(k);
    }
    out << ',';
    if (error) {
        out << *error;
    }
    out << ',' << e->residual << ',' << search_space.value_or(e->search_space_size) << ','
        << e->candidates_evaluated << ',' << gamma_label(e->chosen_gamma) << ',' << e->kappa
        << ',';
    if (e->bound) {
        out << *e->bound;
    }
}

void vector_values(std::ostream& out, const Vector& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        out << ',' << v(k);
    }
}

} // namespace

std::string trace_csv_header(int n, int m, int p) {
    std::ostringstream out;
    out << 't';
    for (int k = 1; k <= n; ++k) out << ",x" << k;
    for (int k = 1; k <= m; ++k) out << ",u" << k;
    for (int k = 1; k <= p; ++k) out << ",y" << k;
    for (int k = 1; k <= p; ++k) out << ",a" << k;
    for (int k = 1; k <= n; ++k) out << ",ctrl_xhat" << k;
    out << ",window_start";
    estimate_columns(out, "fsse_", n);
    out << ",fsse_fallback,fsse_exhausted";
    estimate_columns(out, "exh_", n);
    out << ",exh_exhausted,detectable";
    return out.str();
}

void write_trace_csv(std::ostream& out, const RunTrace& trace, int n, int m, int p) {
    const auto old_precision = out.precision(17);
    out << trace_csv_header(n, m, p) << '\n';
    for (const StepRecord& s : trace.steps) {
        out << s.t;
        vector_values(out, s.x);
        vector_values(out, s.u);
        vector_values(out, s.y);
        vector_values(out, s.a);
        vector_values(out, s.x_hat);
        const WindowRecord* w = s.window ? &trace.windows[*s.window] : nullptr;
        out << ',';
        if (w) {
            out << (w->t - trace.tau + 1);
        }
        // FSSE group
        if (w && w->fsse) {
            const FsseOutcome& o = *w->fsse;
            estimate_values(out, o.estimate ? &*o.estimate : nullptr, w->fsse_error,
                            o.pruned_size, n);
            out << ',' << (o.fell_back_to_full ? 1 : 0) << ',' << (o.estimate ? 0 : 1);
        } else {
            estimate_values(out, nullptr, std::nullopt, std::nullopt, n);
            out << ",,";
        }
        // exhaustive group
        if (w && w->exhaustive_run) {
            estimate_values(out, w->exhaustive ? &*w->exhaustive : nullptr, w->exhaustive_error,
                            std::nullopt, n);
            out << ',' << (w->exhaustive ? 0 : 1);
        } else {
            estimate_values(out, nullptr, std::nullopt, std::nullopt, n);
            out << ',';
        }
        out << ',';
        if (w) {
            out << (w->detectable ? 1 : 0);
        }
        out << '\n';
    }
    out.precision(old_precision);
}

void write_agreement_csv(std::ostream& out, const RunTrace& trace) {
    out << agreement_csv_header() << '\n';
    for (const WindowRecord& w : trace.windows) {
        if (w.fsse) {
            out << agreement_csv_rows(w.fsse->report);
        }
    }
}

namespace {

nlohmann::json summary_doc(const EstimatorSummary& s) {
    return {{"windows", s.windows},
            {"exhausted", s.exhausted},
            {"fallbacks", s.fallbacks},
            {"mean_error", s.mean_error},
            {"max_error", s.max_error},
            {"mean_search_space", s.mean_search_space},
            {"mean_candidates_evaluated", s.mean_candidates},
            {"bound_violations", s.bound_violations},
            {"seconds", s.seconds}};
}

} // namespace

std::string summary_json(const RunTrace& trace, const Pipeline& pipeline) {
    nlohmann::json doc;
    doc["name"] = trace.name;
    doc["mode"] = to_string(trace.mode);
    doc["agreement"] = to_string(trace.agreement);
    doc["seed"] = trace.seed;
    doc["steps"] = trace.steps.size();
    doc["windows"] = trace.windows.size();
    doc["psi_bar"] = pipeline.noise().psi_bar;
    doc["Delta_s"] = pipeline.Delta_s();
    doc["delta_2s"] = pipeline.delta_2s();
    doc["sparse_observable"] = pipeline.sparse_observable();
    doc["eta"] = pipeline.eta() ? nlohmann::json(*pipeline.eta()) : nlohmann::json(nullptr);
    doc["epsilon"] = pipeline.epsilon();
    const Partition& part = pipeline.partition();
    doc["M_T"] = part.M_T ? nlohmann::json(*part.M_T) : nlohmann::json(nullptr);
    doc["m_T"] = part.m_T ? nlohmann::json(*part.m_T) : nlohmann::json(nullptr);
    doc["full_search_space"] = pipeline.solver().full_sigma().size();
    std::size_t detectable = 0;
    for (const WindowRecord& w : trace.windows) {
        detectable += w.detectable ? 1 : 0;
    }
    doc["detectable_windows"] = detectable;
    if (trace.mode != EstimatorMode::exhaustive) {
        doc["fsse"] = summary_doc(summarize_fsse(trace));
    }
    if (trace.mode != EstimatorMode::fsse) {
        doc["exhaustive"] = summary_doc(summarize_exhaustive(trace));
    }
    doc["wall_seconds"] = trace.wall_seconds;
    doc["note"] = "wall times are hardware-dependent; compare candidate counts and ratios";
    return doc.dump(2);
}

} // namespace fsse
