#include "fsse/estimator.hpp"

#include "fsse/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>

namespace fsse {

void for_each_combination(std::size_t p, std::size_t k,
                          const std::function<void(const SensorSet&)>& fn) {
    if (k > p) {
        return;
    }
    SensorSet idx(k);
    for (std::size_t i = 0; i < k; ++i) {
        idx[i] = i;
    }
    while (true) {
        fn(idx);
        // Advance the rightmost index that still has room.
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == p - k + (i - 1)) {
            --i;
        }
        if (i == 0) {
            return;
        }
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

std::size_t binomial(std::size_t n, std::size_t k) {
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    std::size_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

CandidateSet build_full_sigma(std::size_t p, int s_max) {
    if (s_max < 0 || 2 * static_cast<std::size_t>(s_max) >= p) {
        throw DimensionError("build_full_sigma requires 2*s < p");
    }
    if (p > 64) {
        throw DimensionError("at most 64 sensors are supported");
    }
    CandidateSet set;
    set.provenance = Provenance::full;
    set.candidates.reserve(binomial(p, static_cast<std::size_t>(s_max)));
    for_each_combination(p, static_cast<std::size_t>(s_max), [&](const SensorSet& g) {
        std::uint64_t mask = 0;
        for (SensorIndex i : g) {
            mask |= std::uint64_t{1} << i;
        }
        set.candidates.push_back({g, set.candidates.size(), mask});
    });
    return set;
}


namespace {

std::uint64_t to_mask(const SensorSet& set) {
    std::uint64_t m = 0;
    for (SensorIndex i : set) {
        m |= std::uint64_t{1} << i;
    }
    return m;
}

} // namespace

namespace {

// Positions in `full` of the candidates surviving every rule.
std::vector<const Candidate*> surviving(const CandidateSet& full, const AgreementReport& report,
                                        PruneCounts& counts) {
    // Sensor sets as bitmasks; p <= 64 is far beyond enumerable sizes anyway.
    struct Rule {
        TypeClass cls;
        bool non_agreeable_star, large, small;
        std::uint64_t members, minus, plus;
    };
    std::vector<Rule> rules;
    rules.reserve(report.verdicts.size());
    const int s = report.s_max;
    for (const TypeVerdict& v : report.verdicts) {
        if (v.cls == TypeClass::trivial) {
            continue;
        }
        if (!v.members.empty() && v.members.back() >= 64) {
            throw DimensionError("prune_sigma supports at most 64 sensors");
        }
        rules.push_back({v.cls, v.non_agreeable_star(), v.agreeable_large(s), v.agreeable_small(s),
                         to_mask(v.members), to_mask(v.disagreeing), to_mask(v.agreeing)});
    }

    std::vector<const Candidate*> out;
    out.reserve(full.size());
    for (const Candidate& c : full.candidates) {
        const std::uint64_t g = c.mask != 0 || c.removed.empty() ? c.mask : to_mask(c.removed);
        bool minus = false;
        bool large = false;
        bool small = false;
        bool diamond = false;
        for (const Rule& r : rules) {
            const std::uint64_t overlap = g & r.members;
            if (r.cls == TypeClass::diamond) {
                diamond = diamond || (g & r.minus) != r.minus || (g & r.plus) != 0;
            } else if (r.non_agreeable_star) {
                minus = minus || overlap == 0;
            } else if (r.large) {
                large = large || overlap != 0;
            } else if (r.small) {
                small = small || (overlap != 0 && overlap != r.members);
            }
        }
        counts.non_agreeable += minus ? 1 : 0;
        counts.agreeable_large += large ? 1 : 0;
        counts.agreeable_small += small ? 1 : 0;
        counts.diamond += diamond ? 1 : 0;
        if (!(minus || large || small || diamond)) {
            out.push_back(&c);
        }
    }
    return out;
}

} // namespace

CandidateSet prune_sigma(const CandidateSet& full, const AgreementReport& report) {
    CandidateSet out;
    out.provenance = Provenance::pruned;
    const std::vector<const Candidate*> kept = surviving(full, report, out.pruned_by);
    out.candidates.reserve(kept.size());
    for (const Candidate* c : kept) {
        out.candidates.push_back(*c);
    }
    return out;
}

int sparse_observability_degree(const ObservationStack& stack, int up_to) {
    const std::size_t p = stack.p();
    int degree = -1;
    for (int k = 0; k <= up_to && static_cast<std::size_t>(k) < p; ++k) {
        bool all_observable = true;
        for_each_combination(p, static_cast<std::size_t>(k), [&](const SensorSet& removed) {
            if (!all_observable) {
                return;
            }
            const Matrix o = stacked_observability(stack, complement(p, removed));
            all_observable = linalg::numerical_rank(o, stack.rank_tol) == stack.n;
        });
        if (!all_observable) {
            break;
        }
        degree = k;
    }
    return degree;
}

double max_projector_complement(const ObservationStack& stack, int s_max) {
    const std::size_t p = stack.p();
    double worst = 0.0;
    for_each_combination(p, static_cast<std::size_t>(s_max), [&](const SensorSet& removed) {
        const Matrix o = stacked_observability(stack, complement(p, removed));
        const Matrix proj = o * linalg::pseudo_inverse(o, stack.rank_tol);
        const Matrix comp = Matrix::Identity(o.rows(), o.rows()) - proj;
        worst = std::max(worst, linalg::sigma_max(comp));
    });
    return worst;
}

double min_sparse_singular_value(const ObservationStack& stack, int removed) {
    const std::size_t p = stack.p();
    double best = std::numeric_limits<double>::infinity();
    for_each_combination(p, static_cast<std::size_t>(removed), [&](const SensorSet& gamma) {
        best = std::min(best, linalg::sigma_min(stacked_observability(stack, complement(p, gamma))));
    });
    return best;
}

std::optional<double> inflation_factor(const Partition& partition) {
    if (!partition.M_T || !partition.m_T) {
        return std::nullopt;
    }
    const double mm = *partition.M_T * *partition.m_T;
    return std::sqrt(1.0 + 16.0 * mm * mm);
}

double default_epsilon(double psi_bar) {
    return 1e-9 * std::max(1.0, psi_bar);
}

BoundConstants compute_bound_constants(const ObservationStack& stack, int s_max,
                                       const Partition& partition, double epsilon) {
    const int removed = 2 * s_max;
    if (sparse_observability_degree(stack, removed) < removed) {
        throw ObservabilityError("system is not " + std::to_string(removed) +
                                 "-sparse observable; delta_2s would be zero");
    }
    BoundConstants c;
    c.Delta_s = max_projector_complement(stack, s_max);
    c.delta_2s = min_sparse_singular_value(stack, removed);
    c.eta = inflation_factor(partition);
    c.epsilon = epsilon;
    return c;
}

CandidateSolver::CandidateSolver(const ObservationStack& stack, int s_max)
    : p_(stack.p()), s_max_(s_max), full_(build_full_sigma(stack.p(), s_max)) {
    kept_.reserve(full_.size());
    O_kept_.reserve(full_.size());
    pinv_.reserve(full_.size());
    for (const Candidate& c : full_.candidates) {
        SensorSet keep = complement(p_, c.removed);
        Matrix o = stacked_observability(stack, keep);
        pinv_.push_back(linalg::pseudo_inverse(o, stack.rank_tol));
        O_kept_.push_back(std::move(o));
        kept_.push_back(std::move(keep));
    }
}

CandidateSolver::Fit CandidateSolver::solve(const Candidate& candidate,
                                            const MeasurementWindow& window) const {
    const std::size_t k = candidate.sigma_index;
    const Vector y = stacked_outputs(window, kept_.at(k));
    Fit fit;
    fit.x_hat = pinv_[k] * y;
    fit.residual = (y - O_kept_[k] * fit.x_hat).norm();
    return fit;
}

namespace {

// First candidate in order whose residual passes; nullopt when none does.
template <class Range, class Get>
std::optional<Estimate> first_fit(const Range& candidates, Get get, const MeasurementWindow& window,
                                  const CandidateSolver& solver, const SearchSettings& settings) {
    const double threshold = settings.kappa * settings.psi_bar + settings.epsilon;
    std::size_t evaluated = 0;
    for (const auto& item : candidates) {
        const Candidate& c = get(item);
        ++evaluated;
        CandidateSolver::Fit fit = solver.solve(c, window);
        if (fit.residual < threshold) {
            Estimate e;
            e.x_hat = std::move(fit.x_hat);
            e.chosen_gamma = c.removed;
            e.residual = fit.residual;
            e.candidates_evaluated = evaluated;
            e.search_space_size = candidates.size();
            e.kappa = settings.kappa;
            if (settings.delta_2s && *settings.delta_2s > 0.0) {
                e.bound = ((settings.kappa + 1.0) * settings.psi_bar + settings.epsilon) /
                          *settings.delta_2s;
            }
            return e;
        }
    }
    return std::nullopt;
}

} // namespace

Estimate ex_search(const CandidateSet& candidates, const MeasurementWindow& window,
                   const CandidateSolver& solver, const SearchSettings& settings) {
    if (candidates.empty()) {
        throw ExhaustionError("empty candidate set");
    }
    std::optional<Estimate> e = first_fit(
        candidates.candidates, [](const Candidate& c) -> const Candidate& { return c; }, window,
        solver, settings);
    if (!e) {
        throw ExhaustionError("no candidate among " + std::to_string(candidates.size()) +
                              " passed the residual test at t=" + std::to_string(window.t));
    }
    return std::move(*e);
}

FsseOutcome fsse_detailed(const Partition& partition, const MeasurementWindow& window,
                          const CandidateSolver& solver, const SearchSettings& settings,
                          AgreementMode mode) {
    FsseOutcome out;
    const TransformedWindow transformed = transform_windows(partition, window);
    out.report = classify(partition, transformed, solver.s_max(), settings.psi_bar, mode);
    PruneCounts counts;
    const std::vector<const Candidate*> kept = surviving(solver.full_sigma(), out.report, counts);
    out.pruned_size = kept.size();
    if (kept.empty()) {
        std::clog << "warning: pruned search space empty at t=" << window.t
                  << "; falling back to the full set\n";
        out.fell_back_to_full = true;
        out.estimate = first_fit(
            solver.full_sigma().candidates,
            [](const Candidate& c) -> const Candidate& { return c; }, window, solver, settings);
    } else {
        out.estimate = first_fit(
            kept, [](const Candidate* c) -> const Candidate& { return *c; }, window, solver,
            settings);
    }
    return out;
}

Estimate fsse(const Partition& partition, const MeasurementWindow& window,
              const CandidateSolver& solver, const SearchSettings& settings, AgreementMode mode) {
    FsseOutcome out = fsse_detailed(partition, window, solver, settings, mode);
    if (!out.estimate) {
        throw ExhaustionError("FSSE search exhausted at t=" + std::to_string(window.t));
    }
    return std::move(*out.estimate);
}

} // namespace fsse
