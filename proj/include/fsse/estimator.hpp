#pragma once

#include "fsse/agreement.hpp"
#include "fsse/categorization.hpp"
#include "fsse/system_model.hpp"

#include <cstdint>
#include <functional>
#include <optional>

namespace fsse {

/// Calls fn(subset) for every k-subset of {0..p-1} in lexicographic order.
void for_each_combination(std::size_t p, std::size_t k,
                          const std::function<void(const SensorSet&)>& fn);

std::size_t binomial(std::size_t n, std::size_t k);

enum class Provenance { full, pruned };

/// A removal set Gamma together with its position in the full lexicographic Sigma.
struct Candidate {
    SensorSet removed;
    std::size_t sigma_index = 0;
    std::uint64_t mask = 0; ///< bit i set iff sensor i is removed (filled by build_full_sigma)
};

/// How many candidates each pruning rule matched (rules may overlap).
struct PruneCounts {
    std::size_t non_agreeable = 0;   ///< disjoint from a failing star type
    std::size_t agreeable_large = 0; ///< touches an agreeable star type with > s members
    std::size_t agreeable_small = 0; ///< splits an agreeable star type with <= s members
    std::size_t diamond = 0;         ///< misses [S]-minus or touches [S]-plus of a diamond type
};

struct CandidateSet {
    std::vector<Candidate> candidates;
    Provenance provenance = Provenance::full;
    PruneCounts pruned_by;

    std::size_t size() const { return candidates.size(); }
    bool empty() const { return candidates.empty(); }
};

/// All C(p, s) removal sets in lexicographic order.
CandidateSet build_full_sigma(std::size_t p, int s_max);

/// Removes every candidate ruled out by the agreement evidence; the order of
/// the survivors is preserved.
CandidateSet prune_sigma(const CandidateSet& full, const AgreementReport& report);

/// Largest k <= up_to such that removing any k sensors keeps the stacked
/// observability matrix at rank n; -1 when the full sensor set is unobservable.
int sparse_observability_degree(const ObservationStack& stack, int up_to);

/// Delta_s: max over |Gamma| = s of ||I - O_Gamma O_Gamma^+||.
double max_projector_complement(const ObservationStack& stack, int s_max);

/// min over |Gamma| = k of sigma_min(O with the rows of Gamma removed).
double min_sparse_singular_value(const ObservationStack& stack, int removed);

/// eta = sqrt(1 + 16 M_T^2 m_T^2); absent without non-singleton types.
std::optional<double> inflation_factor(const Partition& partition);

struct BoundConstants {
    double Delta_s = 0.0;
    double delta_2s = 0.0;
    std::optional<double> eta;
    double epsilon = 0.0;

    /// eta * Delta_s, or Delta_s when eta is undefined.
    double fsse_kappa() const { return eta ? *eta * Delta_s : Delta_s; }
    /// Certified estimation radius [(kappa + 1) psi_bar + epsilon] / delta_2s.
    double radius(double kappa, double psi_bar) const {
        return ((kappa + 1.0) * psi_bar + epsilon) / delta_2s;
    }
};

double default_epsilon(double psi_bar);

/// Throws ObservabilityError when the system is not 2s-sparse observable.
BoundConstants compute_bound_constants(const ObservationStack& stack, int s_max,
                                       const Partition& partition, double epsilon);

/// Offline least-squares data for every candidate of the full Sigma.
class CandidateSolver {
public:
    CandidateSolver(const ObservationStack& stack, int s_max);

    std::size_t p() const { return p_; }
    int s_max() const { return s_max_; }
    const CandidateSet& full_sigma() const { return full_; }

    struct Fit {
        Vector x_hat;
        double residual = 0.0;
    };

    /// x_hat = O_Gamma^+ Y_Gamma and the residual ||Y_Gamma - O_Gamma x_hat||.
    Fit solve(const Candidate& candidate, const MeasurementWindow& window) const;

private:
    std::size_t p_;
    int s_max_;
    CandidateSet full_;
    std::vector<SensorSet> kept_;
    std::vector<Matrix> O_kept_;
    std::vector<Matrix> pinv_;
};

struct Estimate {
    Vector x_hat;
    SensorSet chosen_gamma;
    double residual = 0.0;
    std::size_t candidates_evaluated = 0;
    std::size_t search_space_size = 0;
    double kappa = 0.0;
    /// [(kappa + 1) psi_bar + epsilon] / delta_2s when delta_2s > 0.
    std::optional<double> bound;
};

struct SearchSettings {
    double kappa = 1.0;
    double psi_bar = 0.0;
    double epsilon = 0.0;
    std::optional<double> delta_2s;
};

/// Returns the first candidate (in order) whose residual is below
/// kappa * psi_bar + epsilon; throws ExhaustionError when none passes.
Estimate ex_search(const CandidateSet& candidates, const MeasurementWindow& window,
                   const CandidateSolver& solver, const SearchSettings& settings);

struct FsseOutcome {
    AgreementReport report;
    std::size_t pruned_size = 0; ///< |Sigma_T| before any fallback
    bool fell_back_to_full = false;
    std::optional<Estimate> estimate; ///< empty when the search was exhausted
};

/// Online phase: transform, classify, prune, then search the pruned set with
/// kappa = settings.kappa. An empty pruned set falls back to the full Sigma.
FsseOutcome fsse_detailed(const Partition& partition, const MeasurementWindow& window,
                          const CandidateSolver& solver, const SearchSettings& settings,
                          AgreementMode mode);

/// As fsse_detailed, but throws ExhaustionError when the search is exhausted.
Estimate fsse(const Partition& partition, const MeasurementWindow& window,
              const CandidateSolver& solver, const SearchSettings& settings, AgreementMode mode);

} // namespace fsse
