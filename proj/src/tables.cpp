#include "fsse/tables.hpp"

#include <cmath>
#include <functional>
#include <numeric>

namespace fsse {

AgreementReport synthetic_report(const AgreementConfig& config) {
    if (config.types.size() != config.agreeable.size()) {
        throw DimensionError("agreeable flags must parallel the types");
    }
    AgreementReport report;
    report.s_max = config.s_max;
    for (std::size_t k = 0; k < config.types.size(); ++k) {
        TypeVerdict v;
        v.type_index = k;
        v.members = config.types[k];
        std::sort(v.members.begin(), v.members.end());
        v.representative = v.members.front();
        v.cls = classify_size(v.members.size(), config.s_max);
        if (v.cls == TypeClass::diamond) {
            throw DimensionError("synthetic configurations cover star and trivial types only");
        }
        v.agreeable = v.cls == TypeClass::trivial || config.agreeable[k];
        if (v.agreeable) {
            v.agreeing = v.members;
        } else {
            v.disagreeing = v.members;
        }
        report.verdicts.push_back(std::move(v));
    }
    return report;
}

SearchSpaceRow evaluate_config(const AgreementConfig& config) {
    SearchSpaceRow row;
    row.config = config;
    row.pruned = prune_sigma(build_full_sigma(config.p, config.s_max), synthetic_report(config));
    return row;
}

std::vector<AgreementConfig> reference_table1_configs() {
    // Zero-based sensors; S1..S6 -> 0..5.
    const SensorSet s1{0}, s2{1}, s3{2}, s4{3};
    const SensorSet s123{0, 1, 2}, s456{3, 4, 5}, s3456{2, 3, 4, 5};
    const SensorSet g12{0, 1}, g34{2, 3}, g56{4, 5};
    auto cfg = [](std::vector<SensorSet> types, std::vector<bool> ok) {
        return AgreementConfig{6, 2, std::move(types), std::move(ok)};
    };
    return {
        cfg({s123, s456}, {true, false}),
        cfg({s123, s456}, {false, false}),
        cfg({g12, g34, g56}, {true, true, true}),
        cfg({g12, g34, g56}, {true, true, false}),
        cfg({g12, g34, g56}, {true, false, false}),
        cfg({s1, s2, s3456}, {true, true, true}),
        cfg({s1, s2, s3456}, {true, true, false}),
        cfg({s1, s2, s3, s4, g56}, {true, true, true, true, true}),
        cfg({s1, s2, s3, s4, g56}, {true, true, true, true, false}),
        cfg({s1, s2, g34, g56}, {true, true, true, true}),
        cfg({s1, s2, g34, g56}, {true, true, true, false}),
        cfg({s1, s2, g34, g56}, {true, true, false, false}),
    };
}

std::vector<AgreementConfig> enumerate_configs(std::size_t p, int s_max) {
    const std::size_t max_size = std::max<std::size_t>(1, 2 * static_cast<std::size_t>(s_max));
    std::vector<std::vector<std::size_t>> shapes;
    std::vector<std::size_t> current;
    std::function<void(std::size_t, std::size_t)> grow = [&](std::size_t left, std::size_t cap) {
        if (left == 0) {
            shapes.push_back(current);
            return;
        }
        for (std::size_t k = std::min(left, cap); k >= 1; --k) {
            current.push_back(k);
            grow(left - k, k);
            current.pop_back();
        }
    };
    grow(p, max_size);

    std::vector<AgreementConfig> out;
    for (const auto& shape : shapes) {
        AgreementConfig base{p, s_max, {}, {}};
        std::size_t next = 0;
        std::vector<std::size_t> nonsingleton;
        for (std::size_t size : shape) {
            SensorSet t(size);
            std::iota(t.begin(), t.end(), next);
            next += size;
            if (size > 1) {
                nonsingleton.push_back(base.types.size());
            }
            base.types.push_back(std::move(t));
            base.agreeable.push_back(true);
        }
        if (nonsingleton.empty()) {
            continue; // nothing to prune
        }
        for (std::size_t mask = 0; mask < (std::size_t{1} << nonsingleton.size()); ++mask) {
            AgreementConfig c = base;
            for (std::size_t b = 0; b < nonsingleton.size(); ++b) {
                c.agreeable[nonsingleton[b]] = ((mask >> b) & 1U) == 0;
            }
            out.push_back(std::move(c));
        }
    }
    return out;
}

std::vector<SearchSpaceRow> table1(std::size_t p, int s_max) {
    const std::vector<AgreementConfig> configs =
        (p == 6 && s_max == 2) ? reference_table1_configs() : enumerate_configs(p, s_max);
    std::vector<SearchSpaceRow> rows;
    for (const AgreementConfig& c : configs) {
        rows.push_back(evaluate_config(c));
    }
    return rows;
}

double average_size(const std::vector<SearchSpaceRow>& rows) {
    if (rows.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const SearchSpaceRow& r : rows) {
        sum += static_cast<double>(r.pruned.size());
    }
    return sum / static_cast<double>(rows.size());
}

MethodTableRow method_table_row(std::size_t p, int s_max) {
    if (p % 2 != 0 || p < 6) {
        throw DimensionError("method table needs an even p >= 6");
    }
    AgreementConfig base{p, s_max, {}, {}};
    for (std::size_t k = 0; k < p; k += 2) {
        base.types.push_back({k, k + 1});
        base.agreeable.push_back(true);
    }
    auto size_with_failing = [&](std::size_t failing) {
        AgreementConfig c = base;
        for (std::size_t k = 0; k < failing; ++k) {
            c.agreeable[k] = false;
        }
        return evaluate_config(c).pruned.size();
    };
    MethodTableRow row;
    row.p = p;
    row.exhaustive = binomial(p, static_cast<std::size_t>(s_max));
    row.two_failing = size_with_failing(2);
    row.one_failing = size_with_failing(1);
    row.all_failing = size_with_failing(base.types.size());
    const double mean =
        static_cast<double>(row.two_failing + row.one_failing + row.all_failing) / 3.0;
    row.average_ceil = static_cast<std::size_t>(std::ceil(mean - 1e-12));
    return row;
}

std::string format_candidates(const CandidateSet& set) {
    std::string out;
    for (const Candidate& c : set.candidates) {
        if (!out.empty()) {
            out += ',';
        }
        out += format_sensor_set(c.removed);
    }
    return out.empty() ? "(none)" : out;
}

} // namespace fsse
