#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "foodsim/mixture.hpp"
#include "foodsim/pmf.hpp"
#include "foodsim/table.hpp"

namespace foodsim {

// The fixed demographic schema of a participant record. Everything else
// about the survey (source column names, category codes, special codes,
// grouping rules) lives in the VariableMap config.
enum class Field {
    gender,
    age,
    marital_status,
    race_ethnicity,
    education,
    household_income,
};

inline constexpr std::array<Field, 6> kAllFields = {
    Field::gender,        Field::age,       Field::marital_status,
    Field::race_ethnicity, Field::education, Field::household_income,
};

std::string field_name(Field field);
Field field_from_name(const std::string& name);

enum class FieldKind { continuous, categorical, ordinal, count };

struct CategoryDef {
    double code = 0.0;
    std::string label;
};

// How an attribute collapses to the two groups the expert table talks
// about: an explicit code set, a fixed threshold, or the train median.
struct DichotomyRule {
    enum class Kind { codes, threshold, median };
    Kind kind = Kind::codes;
    std::string group_a;
    std::string group_b;
    std::vector<double> group_a_codes;  // kind == codes
    double threshold = 0.0;             // kind == threshold: value >= threshold -> group_a
};

struct FieldSpec {
    std::string column;  // source column in the survey files
    FieldKind kind = FieldKind::continuous;
    std::vector<CategoryDef> categories;            // categorical / ordinal levels, in order
    std::vector<double> drop_codes;                 // special codes that drop the row
    std::vector<std::pair<double, double>> recodes; // special code -> replacement value
    std::optional<DichotomyRule> dichotomy;
};

struct VariableMap {
    std::string id_column = "SEQN";
    std::map<Field, FieldSpec> fields;
    FieldSpec count;  // the eat-out count variable

    void validate() const;  // exactly one spec per field, sane kinds

    static VariableMap load(const std::filesystem::path& path);
    static VariableMap defaults();
    // Same rules re-keyed onto the canonical field names, for data that has
    // already been cleaned and exported (e.g. re-reading our own CSV).
    VariableMap canonical() const;
};

struct ParticipantRecord {
    std::int64_t id = 0;
    double gender = 0.0;
    double age = 0.0;
    double marital_status = 0.0;
    double race_ethnicity = 0.0;
    double education = 0.0;
    double household_income = 0.0;
    int eat_out_count = 0;

    double value(Field field) const;
    void set_value(Field field, double value);
};

// Inner join of two single-member tables on the id column. Either table
// containing a duplicate or missing id is an error, not a silent choice.
XportTable join_on_id(const XportTable& left, const XportTable& right,
                      const std::string& id_column);

struct CleanReport {
    std::size_t rows_in = 0;
    std::size_t rows_out = 0;
    std::map<std::string, std::size_t> dropped;  // "field:reason" -> count
    std::map<std::string, std::size_t> recoded;  // "field:code->value" -> count

    std::string to_json() const;
    std::string summary() const;
};

// Applies the per-variable special-code policy (recode, drop codes), drops
// rows with missing values, and bounds the count into the support. Total:
// every input row either becomes a record or is counted under a drop rule.
std::vector<ParticipantRecord> clean(const XportTable& joined, const VariableMap& map,
                                     CleanReport* report = nullptr);

// Seeded partition: |test| = round(test_fraction * N); both halves keep the
// input order. Same seed, same split, independent of platform.
std::pair<std::vector<ParticipantRecord>, std::vector<ParticipantRecord>> split(
    const std::vector<ParticipantRecord>& records, double test_fraction, std::uint64_t seed);

Pmf empirical_pmf(const std::vector<ParticipantRecord>& records, int support_max = 21);
Pmf empirical_pmf(const std::vector<int>& counts, int support_max = 21);

// Feature encoding: continuous -> min-max to [0,1] (bounds frozen from the
// train split), categorical -> one-hot, ordinal -> level index / (L-1).
struct FeatureLayout {
    struct Coordinate {
        Field field;
        FieldKind kind;
        std::string label;  // category label for one-hot coordinates
    };
    std::vector<Coordinate> coordinates;
    std::vector<std::string> names() const;  // "age", "gender=male", ...
};

std::map<std::string, ContinuousBounds> compute_bounds(
    const std::vector<ParticipantRecord>& train, const VariableMap& map);

std::vector<double> encode(const ParticipantRecord& record, const VariableMap& map,
                           const std::map<std::string, ContinuousBounds>& bounds,
                           FeatureLayout* layout = nullptr);

// Cut points for median-based dichotomies, resolved on the train split.
struct DichotomyCuts {
    std::map<Field, double> medians;
};

DichotomyCuts resolve_cuts(const std::vector<ParticipantRecord>& train, const VariableMap& map);

// Group label ("male", "high", ...) of a record for one attribute.
std::string group_of(const ParticipantRecord& record, Field field, const VariableMap& map,
                     const DichotomyCuts& cuts);

// Canonical CSV of cleaned records (id, demographics, eat_out_count).
std::string records_to_csv(const std::vector<ParticipantRecord>& records);
std::vector<ParticipantRecord> records_from_csv(const std::string& text);
void write_records_csv(const std::filesystem::path& path,
                       const std::vector<ParticipantRecord>& records);
std::vector<ParticipantRecord> read_records_csv(const std::filesystem::path& path);

// Rebuilds a raw-style table from cleaned records (canonical column names);
// lets cleaned data re-enter the pipeline and backs the idempotence check.
XportTable records_to_table(const std::vector<ParticipantRecord>& records);

}  // namespace foodsim
