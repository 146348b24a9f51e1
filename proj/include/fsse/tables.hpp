#pragma once

#include "fsse/estimator.hpp"

#include <string>

namespace fsse {

/// One hypothetical agreement configuration: a partition of the p sensors into
/// types and, for every type with two or more members, whether it agreed.
/// Types here never reach the diamond size, so only the star rules apply.
struct AgreementConfig {
    std::size_t p = 0;
    int s_max = 0;
    std::vector<SensorSet> types;
    std::vector<bool> agreeable; ///< parallel to types; ignored for singletons
};

/// AgreementReport equivalent to `config`: failing types get every member in
/// [S]-minus, agreeing types none.
AgreementReport synthetic_report(const AgreementConfig& config);

struct SearchSpaceRow {
    AgreementConfig config;
    CandidateSet pruned;
};

SearchSpaceRow evaluate_config(const AgreementConfig& config);

/// The twelve listed configurations for p = 6, s = 2 (pairs and triples of
/// sensors with the agreeable subset shown in the published table).
std::vector<AgreementConfig> reference_table1_configs();

/// All contiguous type layouts of p sensors with type sizes in [1, 2s]
/// (sizes non-increasing) and every agreeable subset of the non-singleton types.
std::vector<AgreementConfig> enumerate_configs(std::size_t p, int s_max);

std::vector<SearchSpaceRow> table1(std::size_t p, int s_max);

double average_size(const std::vector<SearchSpaceRow>& rows);

/// Pairwise type family: {S1,S2},{S3,S4},... with p even.
struct MethodTableRow {
    std::size_t p = 0;
    std::size_t exhaustive = 0;        ///< C(p, s)
    std::size_t two_failing = 0;       ///< two pair types fail agreement
    std::size_t one_failing = 0;       ///< one pair type fails
    std::size_t all_failing = 0;       ///< every pair type fails
    std::size_t average_ceil = 0;      ///< ceil of the mean of the three cases
};

MethodTableRow method_table_row(std::size_t p, int s_max);

/// "{S4,S5},{S4,S6},{S5,S6}" style listing of a candidate set.
std::string format_candidates(const CandidateSet& set);

} // namespace fsse
