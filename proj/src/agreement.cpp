#include "fsse/agreement.hpp"

#include <algorithm>
#include <sstream>

namespace fsse {

TypeClass classify_size(std::size_t size, int s_max) {
    if (size <= 1) {
        return TypeClass::trivial;
    }
    return size < static_cast<std::size_t>(2 * s_max + 1) ? TypeClass::star : TypeClass::diamond;
}

const char* to_string(TypeClass cls) {
    switch (cls) {
    case TypeClass::trivial:
        return "trivial";
    case TypeClass::star:
        return "star";
    case TypeClass::diamond:
        return "diamond";
    }
    return "?";
}

const char* to_string(AgreementMode mode) {
    return mode == AgreementMode::mean ? "mean" : "median";
}

TransformedWindow transform_windows(const Partition& partition, const MeasurementWindow& window) {
    TransformedWindow out;
    out.t = window.t;
    out.types.reserve(partition.types.size());
    for (std::size_t k = 0; k < partition.types.size(); ++k) {
        const SensorType& type = partition.types[k];
        TransformedType tt;
        tt.type_index = k;
        tt.members = type.members;
        tt.hat.resize(window.Y.at(type.representative).size(), static_cast<Eigen::Index>(type.size()));
        for (std::size_t m = 0; m < type.size(); ++m) {
            const SensorIndex j = type.members[m];
            if (j == type.representative) {
                tt.hat.col(static_cast<Eigen::Index>(m)) = window.Y.at(j);
            } else {
                tt.hat.col(static_cast<Eigen::Index>(m)).noalias() = type.transform(j) * window.Y.at(j);
            }
        }
        if (type.size() > 1) { // singletons are never tested
            tt.median = column_median(tt.hat);
            tt.mean = column_mean(tt.hat);
        }
        out.types.push_back(std::move(tt));
    }
    return out;
}

namespace {

Matrix as_columns(std::span<const Vector> values) {
    Matrix m(values.front().size(), static_cast<Eigen::Index>(values.size()));
    for (std::size_t k = 0; k < values.size(); ++k) {
        m.col(static_cast<Eigen::Index>(k)) = values[k];
    }
    return m;
}

} // namespace

Vector column_median(const Matrix& columns) {
    const Eigen::Index k = columns.cols();
    if (k == 0) {
        throw DimensionError("median of an empty set");
    }
    if (k <= 2) {
        return k == 1 ? Vector(columns.col(0)) : Vector(0.5 * (columns.col(0) + columns.col(1)));
    }
    Vector out(columns.rows());
    std::vector<double> row(static_cast<std::size_t>(k));
    for (Eigen::Index r = 0; r < columns.rows(); ++r) {
        for (Eigen::Index l = 0; l < k; ++l) {
            row[static_cast<std::size_t>(l)] = columns(r, l);
        }
        std::sort(row.begin(), row.end());
        const std::size_t h = static_cast<std::size_t>(k / 2);
        out(r) = (k % 2 == 1) ? row[h] : 0.5 * (row[h - 1] + row[h]);
    }
    return out;
}

Vector column_mean(const Matrix& columns) {
    if (columns.cols() == 0) {
        throw DimensionError("mean of an empty set");
    }
    return columns.rowwise().mean();
}

Vector vector_median(std::span<const Vector> values) {
    if (values.empty()) {
        throw DimensionError("vector_median of an empty set");
    }
    return column_median(as_columns(values));
}

Vector vector_mean(std::span<const Vector> values) {
    if (values.empty()) {
        throw DimensionError("vector_mean of an empty set");
    }
    return column_mean(as_columns(values));
}

namespace {

MemberSplit split_against(const TransformedType& type, const Vector& center, double threshold) {
    MemberSplit split;
    split.agreeing.reserve(type.members.size());
    for (std::size_t k = 0; k < type.members.size(); ++k) {
        if ((type.hat.col(static_cast<Eigen::Index>(k)) - center).norm() <= threshold) {
            split.agreeing.push_back(type.members[k]);
        } else {
            split.disagreeing.push_back(type.members[k]);
        }
    }
    split.agreeable = split.disagreeing.empty();
    return split;
}

} // namespace

MemberSplit check_median_agreement(const TransformedType& type, double M_T, double psi_bar) {
    return split_against(type, type.median, 2.0 * M_T * psi_bar);
}

MemberSplit check_mean_agreement(const TransformedType& type, double M_T, double psi_bar) {
    return split_against(type, type.mean, (1.0 + M_T) * psi_bar);
}

AgreementReport classify(const Partition& partition, const TransformedWindow& transformed,
                         int s_max, double psi_bar, AgreementMode mode) {
    AgreementReport report;
    report.t = transformed.t;
    report.s_max = s_max;
    report.verdicts.reserve(partition.types.size());
    const double M_T = partition.M_T.value_or(1.0);
    for (std::size_t k = 0; k < partition.types.size(); ++k) {
        const SensorType& type = partition.types[k];
        TypeVerdict v;
        v.type_index = k;
        v.representative = type.representative;
        v.members = type.members;
        v.cls = classify_size(type.size(), s_max);
        if (v.cls == TypeClass::trivial) {
            v.agreeing = type.members;
        } else {
            const TransformedType& tt = transformed.types.at(k);
            MemberSplit split = (v.cls == TypeClass::diamond || mode == AgreementMode::median)
                                          ? check_median_agreement(tt, M_T, psi_bar)
                                          : check_mean_agreement(tt, M_T, psi_bar);
            v.agreeable = split.agreeable;
            v.disagreeing = std::move(split.disagreeing);
            v.agreeing = std::move(split.agreeing);
        }
        report.verdicts.push_back(std::move(v));
    }
    return report;
}

std::string agreement_csv_header() {
    return "t,type_representative,class,agreeable,disagreeing_count";
}

std::string agreement_csv_rows(const AgreementReport& report) {
    std::ostringstream out;
    for (const TypeVerdict& v : report.verdicts) {
        out << report.t << ',' << (v.representative + 1) << ',' << to_string(v.cls) << ','
            << (v.agreeable ? 1 : 0) << ',' << v.disagreeing.size() << '\n';
    }
    return out.str();
}

} // namespace fsse
