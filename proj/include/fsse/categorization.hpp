#pragma once

#include "fsse/system_model.hpp"
#include "fsse/types.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace fsse {

struct EquivalenceTolerances {
    /// Relative residual bound: accept T iff ||T O_j - O_i|| <= equiv_tol * max(1, ||O_i||).
    double equiv_tol = 1e-8;
    /// T counts as singular when sigma_min(T) <= singularity_tol * sigma_max(T).
    double singularity_tol = 1e-10;
    double rank_tol = 1e-10;
};

/// Returns a nonsingular T with T * O_j = O_i when sensors i and j carry
/// equivalent observations, and nullopt otherwise.
///
/// The least-squares solution O_i O_j^+ is completed on the orthogonal
/// complement of range(O_j) by an identity block, which makes it invertible
/// whenever the two ranks agree.
std::optional<Matrix> check_equivalence(const Matrix& O_i, const Matrix& O_j,
                                        const EquivalenceTolerances& tol = {});

/// Equivalence partitioning of `members` under `related(i, j)`.
///
/// Each round takes the lowest remaining index as representative and collects
/// every remaining member related to it. Classes come out in order of their
/// representatives; members within a class are sorted.
template <class Relation>
std::vector<SensorSet> ep_solve(SensorSet members, Relation&& related) {
    std::sort(members.begin(), members.end());
    std::vector<SensorSet> classes;
    while (!members.empty()) {
        const SensorIndex rep = members.front();
        SensorSet cls{rep};
        SensorSet rest;
        for (std::size_t k = 1; k < members.size(); ++k) {
            if (related(rep, members[k])) {
                cls.push_back(members[k]);
            } else {
                rest.push_back(members[k]);
            }
        }
        classes.push_back(std::move(cls));
        members = std::move(rest);
    }
    return classes;
}

/// One analytic sensor type.
struct SensorType {
    SensorIndex representative = 0;
    SensorSet members;
    /// T_{rep,j} for every member j (identity for the representative).
    std::map<SensorIndex, Matrix> transforms;
    int rank = 0;

    std::size_t size() const { return members.size(); }
    bool contains(SensorIndex j) const;
    const Matrix& transform(SensorIndex j) const { return transforms.at(j); }
};

struct Partition {
    std::size_t p = 0;
    int tau = 0;
    std::vector<SensorType> types;
    /// max ||T_ij|| over members of non-singleton types; absent without such types.
    std::optional<double> M_T;
    /// min ||T_ji|| = min ||T_ij^-1|| over the same range.
    std::optional<double> m_T;

    bool has_nonsingleton() const { return M_T.has_value(); }
};

/// Fills M_T and m_T from the transforms of the non-singleton types.
void compute_transform_constants(Partition& partition);

/// Double-equivalence partitioning: equal-rank classes first, then each class
/// is refined with check_equivalence. Types are ordered by representative.
Partition de_partition(const ObservationStack& stack, const EquivalenceTolerances& tol = {});

/// JSON document with sensor labels 1-based.
std::string serialize_partition(const Partition& partition);
Partition parse_partition(std::string_view text);

/// Human-readable listing such as "{S2},{S5},{S1,S3},{S4,S6}" (1-based).
std::string format_sensor_set(const SensorSet& set);

} // namespace fsse
