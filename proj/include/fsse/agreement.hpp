#pragma once

#include "fsse/categorization.hpp"
#include "fsse/system_model.hpp"

#include <span>
#include <string>

namespace fsse {

enum class AgreementMode { mean, median };

/// trivial: one member; star: 2 <= size < 2s+1; diamond: size >= 2s+1.
enum class TypeClass { trivial, star, diamond };

TypeClass classify_size(std::size_t size, int s_max);
const char* to_string(TypeClass cls);
const char* to_string(AgreementMode mode);

/// Member measurements of one type mapped into the representative's frame.
struct TransformedType {
    std::size_t type_index = 0;
    SensorSet members;
    Matrix hat; ///< column k = T_{rep, members[k]} * Y_{members[k]}
    Vector median;
    Vector mean;
};

struct TransformedWindow {
    long t = 0;
    std::vector<TransformedType> types; ///< same order as Partition::types
};

TransformedWindow transform_windows(const Partition& partition, const MeasurementWindow& window);

/// Elementwise median; an even count takes the mean of the two middle values.
Vector vector_median(std::span<const Vector> values);
Vector vector_mean(std::span<const Vector> values);
/// Same rules applied to the columns of a matrix.
Vector column_median(const Matrix& columns);
Vector column_mean(const Matrix& columns);

struct MemberSplit {
    bool agreeable = true;
    SensorSet disagreeing; ///< [S]-minus: members beyond the threshold
    SensorSet agreeing;    ///< [S]-plus
};

/// Member j agrees iff ||hat_j - median|| <= 2 M_T psi_bar.
MemberSplit check_median_agreement(const TransformedType& type, double M_T, double psi_bar);
/// Member j agrees iff ||hat_j - mean|| <= (1 + M_T) psi_bar.
MemberSplit check_mean_agreement(const TransformedType& type, double M_T, double psi_bar);

struct TypeVerdict {
    std::size_t type_index = 0;
    SensorIndex representative = 0;
    SensorSet members;
    TypeClass cls = TypeClass::trivial;
    bool agreeable = true;
    SensorSet disagreeing;
    SensorSet agreeing;

    /// Star type failing its agreement test.
    bool non_agreeable_star() const { return cls == TypeClass::star && !agreeable; }
    /// Agreeable star type with more than s members: attack-free.
    bool agreeable_large(int s_max) const {
        return cls == TypeClass::star && agreeable && members.size() > static_cast<std::size_t>(s_max);
    }
    /// Agreeable star type with at most s members: all or none attacked.
    bool agreeable_small(int s_max) const {
        return cls == TypeClass::star && agreeable && members.size() <= static_cast<std::size_t>(s_max);
    }
};

struct AgreementReport {
    long t = 0;
    int s_max = 0;
    std::vector<TypeVerdict> verdicts;
};

/// Diamond types always use the median split; star types use `mode`.
AgreementReport classify(const Partition& partition, const TransformedWindow& transformed,
                         int s_max, double psi_bar, AgreementMode mode);

/// Columns: t,type_representative,class,agreeable,disagreeing_count
std::string agreement_csv_header();
std::string agreement_csv_rows(const AgreementReport& report);

} // namespace fsse
