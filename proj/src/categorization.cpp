#include "fsse/categorization.hpp"

#include "fsse/linalg.hpp"

#include <json.hpp>

#include <algorithm>
#include <iostream>
#include <limits>

namespace fsse {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) {
        throw ParseError(field, "expected a non-empty nested array");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ParseError(field, "ragged row " + std::to_string(r));
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

} // namespace

bool SensorType::contains(SensorIndex j) const {
    return std::binary_search(members.begin(), members.end(), j);
}

std::optional<Matrix> check_equivalence(const Matrix& O_i, const Matrix& O_j,
                                        const EquivalenceTolerances& tol) {
    if (O_i.rows() != O_j.rows() || O_i.cols() != O_j.cols()) {
        return std::nullopt;
    }
    const Eigen::Index tau = O_i.rows();

    Eigen::JacobiSVD<Matrix> svd_i(O_i, Eigen::ComputeFullU);
    Eigen::JacobiSVD<Matrix> svd_j(O_j, Eigen::ComputeFullU | Eigen::ComputeThinV);
    auto rank_of = [&](const Eigen::VectorXd& sv) {
        if (sv.size() == 0 || sv(0) == 0.0) {
            return Eigen::Index{0};
        }
        Eigen::Index r = 0;
        while (r < sv.size() && sv(r) > tol.rank_tol * sv(0)) {
            ++r;
        }
        return r;
    };
    const Eigen::Index rank_i = rank_of(svd_i.singularValues());
    const Eigen::Index rank_j = rank_of(svd_j.singularValues());
    if (rank_i != rank_j) {
        return std::nullopt;
    }
    const Eigen::Index r = rank_j;

    // Least-squares T' = O_i O_j^+ restricted to the numerical range of O_j.
    Matrix t_ls = Matrix::Zero(tau, tau);
    if (r > 0) {
        const Eigen::VectorXd inv_sv = svd_j.singularValues().head(r).cwiseInverse();
        t_ls = O_i * svd_j.matrixV().leftCols(r) * inv_sv.asDiagonal() *
               svd_j.matrixU().leftCols(r).transpose();
    }
    const double residual = linalg::sigma_max(t_ls * O_j - O_i);
    if (residual > tol.equiv_tol * std::max(1.0, linalg::sigma_max(O_i))) {
        return std::nullopt;
    }

    // Nonsingular completion: map range(O_j)^perp onto range(O_i)^perp.
    const Eigen::Index k = tau - r;
    Matrix t = t_ls;
    if (k > 0) {
        t += svd_i.matrixU().rightCols(k) * svd_j.matrixU().rightCols(k).transpose();
    }

    const Eigen::VectorXd sv_t = Eigen::JacobiSVD<Matrix>(t).singularValues();
    if (!(sv_t(sv_t.size() - 1) > tol.singularity_tol * sv_t(0))) {
        std::clog << "warning: equal-rank pair produced a singular completion; treated as "
                     "non-equivalent\n";
        return std::nullopt;
    }
    return t;
}

void compute_transform_constants(Partition& partition) {
    double max_norm = 0.0;
    double min_inv_norm = std::numeric_limits<double>::infinity();
    bool any = false;
    for (const SensorType& type : partition.types) {
        if (type.size() < 2) {
            continue;
        }
        any = true;
        for (SensorIndex j : type.members) {
            const Matrix& t = type.transform(j);
            max_norm = std::max(max_norm, linalg::sigma_max(t));
            // ||T_ji|| = ||T_ij^-1|| = 1 / sigma_min(T_ij)
            min_inv_norm = std::min(min_inv_norm, 1.0 / linalg::sigma_min(t));
        }
    }
    if (any) {
        partition.M_T = max_norm;
        partition.m_T = min_inv_norm;
    } else {
        partition.M_T.reset();
        partition.m_T.reset();
    }
}

Partition de_partition(const ObservationStack& stack, const EquivalenceTolerances& tol) {
    SensorSet all(stack.p());
    for (SensorIndex i = 0; i < stack.p(); ++i) {
        all[i] = i;
    }

    const auto rank_classes = ep_solve(all, [&](SensorIndex i, SensorIndex j) {
        return stack.sensors[i].rank == stack.sensors[j].rank;
    });

    Partition partition;
    partition.p = stack.p();
    partition.tau = stack.tau;
    for (const SensorSet& rank_class : rank_classes) {
        std::map<std::pair<SensorIndex, SensorIndex>, Matrix> witnesses;
        const auto classes = ep_solve(rank_class, [&](SensorIndex i, SensorIndex j) {
            auto t = check_equivalence(stack.O(i), stack.O(j), tol);
            if (t) {
                witnesses.emplace(std::make_pair(i, j), std::move(*t));
                return true;
            }
            return false;
        });
        for (const SensorSet& cls : classes) {
            SensorType type;
            type.representative = cls.front();
            type.members = cls;
            type.rank = stack.sensors[cls.front()].rank;
            type.transforms.emplace(type.representative, Matrix::Identity(stack.tau, stack.tau));
            for (std::size_t k = 1; k < cls.size(); ++k) {
                type.transforms.emplace(cls[k], witnesses.at({type.representative, cls[k]}));
            }
            partition.types.push_back(std::move(type));
        }
    }

    std::sort(partition.types.begin(), partition.types.end(),
              [](const SensorType& a, const SensorType& b) {
                  return a.representative < b.representative;
              });
    compute_transform_constants(partition);
    return partition;
}

std::string serialize_partition(const Partition& partition) {
    json doc;
    doc["p"] = partition.p;
    doc["tau"] = partition.tau;
    doc["types"] = json::array();
    for (const SensorType& type : partition.types) {
        json t;
        t["representative"] = type.representative + 1;
        json members = json::array();
        for (SensorIndex j : type.members) {
            members.push_back(j + 1);
        }
        t["members"] = members;
        t["rank"] = type.rank;
        json transforms = json::object();
        for (const auto& [j, m] : type.transforms) {
            transforms[std::to_string(j + 1)] = matrix_to_json(m);
        }
        t["transforms"] = transforms;
        doc["types"].push_back(std::move(t));
    }
    doc["M_T"] = partition.M_T ? json(*partition.M_T) : json(nullptr);
    doc["m_T"] = partition.m_T ? json(*partition.m_T) : json(nullptr);
    return doc.dump(2) + "\n";
}

Partition parse_partition(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("partition", e.what());
    }
    Partition partition;
    try {
        partition.p = doc.at("p").get<std::size_t>();
        partition.tau = doc.at("tau").get<int>();
        std::vector<bool> seen(partition.p, false);
        for (const json& t : doc.at("types")) {
            SensorType type;
            type.representative = t.at("representative").get<std::size_t>() - 1;
            for (const json& j : t.at("members")) {
                const auto idx = j.get<std::size_t>();
                if (idx < 1 || idx > partition.p || seen[idx - 1]) {
                    throw ParseError("types.members", "invalid or repeated sensor " +
                                                          std::to_string(idx));
                }
                seen[idx - 1] = true;
                type.members.push_back(idx - 1);
            }
            std::sort(type.members.begin(), type.members.end());
            if (!type.contains(type.representative)) {
                throw ParseError("types.representative", "representative is not a member");
            }
            type.rank = t.at("rank").get<int>();
            for (SensorIndex j : type.members) {
                const std::string key = std::to_string(j + 1);
                Matrix m = matrix_from_json(t.at("transforms").at(key), "types.transforms." + key);
                if (m.rows() != partition.tau || m.cols() != partition.tau) {
                    throw ParseError("types.transforms." + key, "expected tau x tau");
                }
                type.transforms.emplace(j, std::move(m));
            }
            partition.types.push_back(std::move(type));
        }
        if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
            throw ParseError("types", "types do not cover every sensor");
        }
    } catch (const json::exception& e) {
        throw ParseError("partition", e.what());
    }
    // Constants are recomputed rather than trusted from the document.
    compute_transform_constants(partition);
    return partition;
}

std::string format_sensor_set(const SensorSet& set) {
    std::string out = "{";
    for (std::size_t k = 0; k < set.size(); ++k) {
        if (k > 0) {
            out += ",";
        }
        out += "S" + std::to_string(set[k] + 1);
    }
    return out + "}";
}

} // namespace fsse
