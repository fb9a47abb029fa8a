#include "foodsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "foodsim/csv.hpp"
#include "foodsim/errors.hpp"
#include "foodsim/rng.hpp"
#include "foodsim/toml.hpp"
#include "foodsim/util.hpp"

namespace foodsim {

namespace {

constexpr int kSupportMax = 21;

FieldKind kind_from_name(const std::string& name) {
    if (name == "continuous") return FieldKind::continuous;
    if (name == "categorical") return FieldKind::categorical;
    if (name == "ordinal") return FieldKind::ordinal;
    if (name == "count") return FieldKind::count;
    throw ConfigError("unknown field type: " + name);
}

}  // namespace

std::string field_name(Field field) {
    switch (field) {
        case Field::gender: return "gender";
        case Field::age: return "age";
        case Field::marital_status: return "marital_status";
        case Field::race_ethnicity: return "race_ethnicity";
        case Field::education: return "education";
        case Field::household_income: return "household_income";
    }
    throw ConfigError("bad field enum");
}

Field field_from_name(const std::string& name) {
    for (Field field : kAllFields) {
        if (field_name(field) == name) return field;
    }
    throw UnknownAttribute("unknown field: " + name);
}

double ParticipantRecord::value(Field field) const {
    switch (field) {
        case Field::gender: return gender;
        case Field::age: return age;
        case Field::marital_status: return marital_status;
        case Field::race_ethnicity: return race_ethnicity;
        case Field::education: return education;
        case Field::household_income: return household_income;
    }
    throw ConfigError("bad field enum");
}

void ParticipantRecord::set_value(Field field, double v) {
    switch (field) {
        case Field::gender: gender = v; return;
        case Field::age: age = v; return;
        case Field::marital_status: marital_status = v; return;
        case Field::race_ethnicity: race_ethnicity = v; return;
        case Field::education: education = v; return;
        case Field::household_income: household_income = v; return;
    }
    throw ConfigError("bad field enum");
}

void VariableMap::validate() const {
    if (id_column.empty()) throw ConfigError("variable map: empty id column");
    for (Field field : kAllFields) {
        auto it = fields.find(field);
        if (it == fields.end()) {
            throw ConfigError("variable map: no entry for field " + field_name(field));
        }
        const FieldSpec& spec = it->second;
        if (spec.column.empty()) {
            throw ConfigError("variable map: empty column for " + field_name(field));
        }
        if (spec.kind == FieldKind::count) {
            throw ConfigError("variable map: field " + field_name(field) + " cannot be a count");
        }
        if (spec.kind != FieldKind::continuous && spec.categories.empty()) {
            throw ConfigError("variable map: " + field_name(field) + " declares no categories");
        }
        std::set<double> codes;
        for (const auto& category : spec.categories) {
            if (!codes.insert(category.code).second) {
                throw ConfigError("variable map: duplicate category code in " + field_name(field));
            }
        }
        if (spec.dichotomy) {
            const auto& rule = *spec.dichotomy;
            if (rule.group_a.empty() || rule.group_b.empty() || rule.group_a == rule.group_b) {
                throw ConfigError("variable map: bad group names for " + field_name(field));
            }
            if (rule.kind == DichotomyRule::Kind::codes && rule.group_a_codes.empty()) {
                throw ConfigError("variable map: empty group_a code set for " + field_name(field));
            }
        }
    }
    if (count.column.empty()) throw ConfigError("variable map: empty count column");
    if (count.kind != FieldKind::count) {
        throw ConfigError("variable map: eat_out_count must have type 'count'");
    }
}

namespace {

FieldSpec parse_field_spec(const toml::Table& doc, const std::string& prefix) {
    FieldSpec spec;
    spec.column = doc.get_string(prefix + "column");
    spec.kind = kind_from_name(doc.get_string(prefix + "type"));

    if (doc.contains(prefix + "codes")) {
        std::vector<double> codes = doc.get_double_array(prefix + "codes");
        std::vector<std::string> labels;
        if (doc.contains(prefix + "labels")) labels = doc.get_string_array(prefix + "labels");
        if (!labels.empty() && labels.size() != codes.size()) {
            throw ConfigError(prefix + "labels must match codes");
        }
        for (std::size_t i = 0; i < codes.size(); ++i) {
            spec.categories.push_back(
                {codes[i], labels.empty() ? format_double(codes[i]) : labels[i]});
        }
    }
    if (doc.contains(prefix + "drop_codes")) {
        spec.drop_codes = doc.get_double_array(prefix + "drop_codes");
    }
    if (doc.contains(prefix + "recode")) {
        for (const auto& entry : doc.get_string_array(prefix + "recode")) {
            auto equals = entry.find('=');
            if (equals == std::string::npos) {
                throw ConfigError(prefix + "recode entries look like \"5555=21\", got " + entry);
            }
            auto from = parse_double(entry.substr(0, equals));
            auto to = parse_double(entry.substr(equals + 1));
            if (!from || !to) throw ConfigError(prefix + "recode entry is not numeric: " + entry);
            spec.recodes.emplace_back(*from, *to);
        }
    }
    if (doc.contains(prefix + "group_rule")) {
        DichotomyRule rule;
        std::string kind = doc.get_string(prefix + "group_rule");
        rule.group_a = doc.get_string(prefix + "group_a");
        rule.group_b = doc.get_string(prefix + "group_b");
        if (kind == "codes") {
            rule.kind = DichotomyRule::Kind::codes;
            rule.group_a_codes = doc.get_double_array(prefix + "group_a_codes");
        } else if (kind == "threshold") {
            rule.kind = DichotomyRule::Kind::threshold;
            rule.threshold = doc.get_double(prefix + "group_threshold");
        } else if (kind == "median") {
            rule.kind = DichotomyRule::Kind::median;
        } else {
            throw ConfigError(prefix + "group_rule must be codes/threshold/median, got " + kind);
        }
        spec.dichotomy = rule;
    }
    return spec;
}

}  // namespace

VariableMap VariableMap::load(const std::filesystem::path& path) {
    toml::Table doc = toml::Table::parse_file(path);
    VariableMap map;
    map.id_column = doc.get_string_or("id_column", "SEQN");
    for (Field field : kAllFields) {
        std::string prefix = "fields." + field_name(field) + ".";
        if (!doc.contains(prefix + "column")) {
            throw ConfigError(path.string() + ": missing [fields." + field_name(field) + "]");
        }
        map.fields[field] = parse_field_spec(doc, prefix);
    }
    if (!doc.contains("fields.eat_out_count.column")) {
        throw ConfigError(path.string() + ": missing [fields.eat_out_count]");
    }
    map.count = parse_field_spec(doc, "fields.eat_out_count.");
    map.validate();
    return map;
}

VariableMap VariableMap::defaults() {
    // Mirrors configs/variable-map.toml: the 2017-2018 pre-pandemic survey
    // release (DEMO + DBQ questionnaire).
    VariableMap map;
    map.id_column = "SEQN";

    FieldSpec gender;
    gender.column = "RIAGENDR";
    gender.kind = FieldKind::categorical;
    gender.categories = {{1, "male"}, {2, "female"}};
    gender.dichotomy = DichotomyRule{DichotomyRule::Kind::codes, "male", "female", {1}, 0.0};
    map.fields[Field::gender] = gender;

    FieldSpec age;
    age.column = "RIDAGEYR";
    age.kind = FieldKind::continuous;
    age.dichotomy = DichotomyRule{DichotomyRule::Kind::median, "high", "low", {}, 0.0};
    map.fields[Field::age] = age;

    FieldSpec marital;
    marital.column = "DMDMARTZ";
    marital.kind = FieldKind::categorical;
    marital.categories = {{1, "married_or_partner"},
                          {2, "widowed_divorced_separated"},
                          {3, "never_married"}};
    marital.drop_codes = {77, 99};
    marital.dichotomy = DichotomyRule{DichotomyRule::Kind::codes, "married", "single", {1}, 0.0};
    map.fields[Field::marital_status] = marital;

    FieldSpec race;
    race.column = "RIDRETH3";
    race.kind = FieldKind::categorical;
    race.categories = {{1, "mexican_american"}, {2, "other_hispanic"}, {3, "white"},
                       {4, "black"},            {6, "asian"},          {7, "other_multiracial"}};
    race.dichotomy = DichotomyRule{DichotomyRule::Kind::codes, "majority", "minority", {3}, 0.0};
    map.fields[Field::race_ethnicity] = race;

    FieldSpec education;
    education.column = "DMDEDUC2";
    education.kind = FieldKind::ordinal;
    education.categories = {{1, "less_than_9th"},
                            {2, "9th_to_11th"},
                            {3, "high_school"},
                            {4, "some_college"},
                            {5, "college_graduate"}};
    education.drop_codes = {7, 9};
    // High education = some college or above.
    education.dichotomy = DichotomyRule{DichotomyRule::Kind::threshold, "high", "low", {}, 4.0};
    map.fields[Field::education] = education;

    FieldSpec income;
    income.column = "INDFMPIR";  // income-to-poverty ratio, continuous
    income.kind = FieldKind::continuous;
    income.dichotomy = DichotomyRule{DichotomyRule::Kind::median, "high", "low", {}, 0.0};
    map.fields[Field::household_income] = income;

    FieldSpec count;
    count.column = "DBD895";  // meals not home prepared, past 7 days
    count.kind = FieldKind::count;
    count.recodes = {{5555, 21}};  // "more than 21 meals" caps at the support
    count.drop_codes = {7777, 9999};
    map.count = count;

    map.validate();
    return map;
}

VariableMap VariableMap::canonical() const {
    VariableMap out = *this;
    out.id_column = "id";
    for (Field field : kAllFields) {
        out.fields[field].column = field_name(field);
        out.fields[field].recodes.clear();  // cleaning already applied them
    }
    out.count.column = "eat_out_count";
    out.count.recodes.clear();
    return out;
}

XportTable join_on_id(const XportTable& left, const XportTable& right,
                      const std::string& id_column) {
    int left_id = left.column_index(id_column);
    int right_id = right.column_index(id_column);
    if (left_id < 0) throw MissingColumn(id_column + " not in table " + left.name);
    if (right_id < 0) throw MissingColumn(id_column + " not in table " + right.name);

    auto key_of = [](const Cell& cell) -> std::optional<std::int64_t> {
        if (!cell.is_number()) return std::nullopt;
        return std::llround(cell.number);
    };

    std::unordered_map<std::int64_t, std::size_t> right_rows;
    right_rows.reserve(right.rows.size());
    for (std::size_t r = 0; r < right.rows.size(); ++r) {
        auto key = key_of(right.rows[r][static_cast<std::size_t>(right_id)]);
        if (!key) continue;  // unjoinable row, inner join skips it
        if (!right_rows.emplace(*key, r).second) {
            throw DuplicateId("id " + std::to_string(*key) + " appears twice in " + right.name);
        }
    }

    XportTable joined;
    joined.name = left.name.empty() ? right.name : left.name + "_" + right.name;
    joined.variables.push_back(left.variables[static_cast<std::size_t>(left_id)]);
    for (std::size_t v = 0; v < left.variables.size(); ++v) {
        if (static_cast<int>(v) != left_id) joined.variables.push_back(left.variables[v]);
    }
    for (std::size_t v = 0; v < right.variables.size(); ++v) {
        if (static_cast<int>(v) != right_id) joined.variables.push_back(right.variables[v]);
    }

    std::set<std::int64_t> seen_left;
    for (const auto& row : left.rows) {
        auto key = key_of(row[static_cast<std::size_t>(left_id)]);
        if (!key) continue;
        if (!seen_left.insert(*key).second) {
            throw DuplicateId("id " + std::to_string(*key) + " appears twice in " + left.name);
        }
        auto match = right_rows.find(*key);
        if (match == right_rows.end()) continue;

        std::vector<Cell> cells;
        cells.reserve(joined.variables.size());
        cells.push_back(row[static_cast<std::size_t>(left_id)]);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (static_cast<int>(c) != left_id) cells.push_back(row[c]);
        }
        const auto& right_row = right.rows[match->second];
        for (std::size_t c = 0; c < right_row.size(); ++c) {
            if (static_cast<int>(c) != right_id) cells.push_back(right_row[c]);
        }
        joined.rows.push_back(std::move(cells));
    }
    return joined;
}

std::string CleanReport::to_json() const {
    nlohmann::json j;
    j["rows_in"] = rows_in;
    j["rows_out"] = rows_out;
    j["dropped"] = dropped;
    j["recoded"] = recoded;
    return j.dump(2) + "\n";
}

std::string CleanReport::summary() const {
    std::string out = "rows in: " + std::to_string(rows_in) + ", rows out: " +
                      std::to_string(rows_out) + "\n";
    for (const auto& [rule, count] : dropped) {
        out += "  dropped " + std::to_string(count) + "  " + rule + "\n";
    }
    for (const auto& [rule, count] : recoded) {
        out += "  recoded " + std::to_string(count) + "  " + rule + "\n";
    }
    return out;
}

std::vector<ParticipantRecord> clean(const XportTable& joined, const VariableMap& map,
                                     CleanReport* report) {
    map.validate();
    CleanReport local;
    CleanReport& log = report ? *report : local;
    log.rows_in = joined.rows.size();

    int id_index = joined.column_index(map.id_column);
    if (id_index < 0) throw MissingColumn(map.id_column + " not in joined table");

    struct BoundColumn {
        std::string name;   // canonical field name, used in report keys
        const FieldSpec* spec;
        int index;
    };
    std::vector<BoundColumn> columns;
    for (Field field : kAllFields) {
        const FieldSpec& spec = map.fields.at(field);
        int index = joined.column_index(spec.column);
        if (index < 0) throw MissingColumn(spec.column + " not in joined table");
        columns.push_back({field_name(field), &spec, index});
    }
    int count_index = joined.column_index(map.count.column);
    if (count_index < 0) throw MissingColumn(map.count.column + " not in joined table");
    columns.push_back({"eat_out_count", &map.count, count_index});

    std::vector<ParticipantRecord> records;
    records.reserve(joined.rows.size());

    for (const auto& row : joined.rows) {
        const Cell& id_cell = row[static_cast<std::size_t>(id_index)];
        if (!id_cell.is_number()) {
            ++log.dropped["id:missing"];
            continue;
        }

        ParticipantRecord record;
        record.id = std::llround(id_cell.number);
        bool dropped = false;

        for (std::size_t i = 0; i < columns.size() && !dropped; ++i) {
            const auto& bound = columns[i];
            const Cell& cell = row[static_cast<std::size_t>(bound.index)];
            if (cell.kind == Cell::Kind::text) {
                ++log.dropped[bound.name + ":non_numeric"];
                dropped = true;
                break;
            }
            if (cell.is_missing()) {
                ++log.dropped[bound.name + ":missing"];
                dropped = true;
                break;
            }
            double value = cell.number;
            for (const auto& [from, to] : bound.spec->recodes) {
                if (value == from) {
                    ++log.recoded[bound.name + ":" + format_double(from) + "->" + format_double(to)];
                    value = to;
                    break;
                }
            }
            for (double code : bound.spec->drop_codes) {
                if (value == code) {
                    ++log.dropped[bound.name + ":drop_code_" + format_double(code)];
                    dropped = true;
                    break;
                }
            }
            if (dropped) break;

            if (bound.spec->kind == FieldKind::count) {
                double rounded = std::round(value);
                if (std::abs(value - rounded) > 1e-9) {
                    ++log.dropped[bound.name + ":non_integer"];
                    dropped = true;
                    break;
                }
                if (rounded < 0 || rounded > kSupportMax) {
                    ++log.dropped[bound.name + ":out_of_range"];
                    dropped = true;
                    break;
                }
                record.eat_out_count = static_cast<int>(rounded);
            } else {
                record.set_value(field_from_name(bound.name), value);
            }
        }
        if (dropped) continue;

        records.push_back(record);
    }

    log.rows_out = records.size();
    return records;
}

std::pair<std::vector<ParticipantRecord>, std::vector<ParticipantRecord>> split(
    const std::vector<ParticipantRecord>& records, double test_fraction, std::uint64_t seed) {
    if (test_fraction < 0.0 || test_fraction > 1.0) {
        throw ConfigError("test fraction must be in [0,1], got " + format_double(test_fraction));
    }

    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    RngStream stream(seed, 0, StreamPurpose::split);
    shuffle(order, stream);

    auto test_size =
        static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(records.size())));
    std::vector<std::size_t> test_indices(order.begin(),
                                          order.begin() + static_cast<std::ptrdiff_t>(test_size));
    std::vector<std::size_t> train_indices(order.begin() + static_cast<std::ptrdiff_t>(test_size),
                                           order.end());
    std::sort(test_indices.begin(), test_indices.end());
    std::sort(train_indices.begin(), train_indices.end());

    std::pair<std::vector<ParticipantRecord>, std::vector<ParticipantRecord>> out;
    out.first.reserve(train_indices.size());
    out.second.reserve(test_indices.size());
    for (std::size_t i : train_indices) out.first.push_back(records[i]);
    for (std::size_t i : test_indices) out.second.push_back(records[i]);
    return out;
}

Pmf empirical_pmf(const std::vector<int>& counts, int support_max) {
    if (counts.empty()) throw EmptyInput("empirical_pmf: no counts");
    std::vector<double> mass(static_cast<std::size_t>(support_max) + 1, 0.0);
    const double unit = 1.0 / static_cast<double>(counts.size());
    for (int count : counts) {
        if (count < 0 || count > support_max) {
            throw InvalidPmf("count " + std::to_string(count) + " outside support 0.." +
                             std::to_string(support_max));
        }
        mass[static_cast<std::size_t>(count)] += unit;
    }
    return Pmf(support_max, std::move(mass));
}

Pmf empirical_pmf(const std::vector<ParticipantRecord>& records, int support_max) {
    if (records.empty()) throw EmptyInput("empirical_pmf: no records");
    std::vector<int> counts;
    counts.reserve(records.size());
    for (const auto& record : records) counts.push_back(record.eat_out_count);
    return empirical_pmf(counts, support_max);
}

std::map<std::string, ContinuousBounds> compute_bounds(
    const std::vector<ParticipantRecord>& train, const VariableMap& map) {
    if (train.empty()) throw EmptyInput("compute_bounds: no train records");
    std::map<std::string, ContinuousBounds> bounds;
    for (Field field : kAllFields) {
        if (map.fields.at(field).kind != FieldKind::continuous) continue;
        ContinuousBounds b{train.front().value(field), train.front().value(field)};
        for (const auto& record : train) {
            b.min = std::min(b.min, record.value(field));
            b.max = std::max(b.max, record.value(field));
        }
        bounds[field_name(field)] = b;
    }
    return bounds;
}

std::vector<double> encode(const ParticipantRecord& record, const VariableMap& map,
                           const std::map<std::string, ContinuousBounds>& bounds,
                           FeatureLayout* layout) {
    std::vector<double> coordinates;
    FeatureLayout local;

    for (Field field : kAllFields) {
        const FieldSpec& spec = map.fields.at(field);
        double value = record.value(field);
        switch (spec.kind) {
            case FieldKind::continuous: {
                auto it = bounds.find(field_name(field));
                if (it == bounds.end()) {
                    throw ConfigError("no frozen bounds for " + field_name(field));
                }
                double range = it->second.max - it->second.min;
                double coord = range > 0.0 ? (value - it->second.min) / range : 0.0;
                coordinates.push_back(std::clamp(coord, 0.0, 1.0));
                local.coordinates.push_back({field, spec.kind, ""});
                break;
            }
            case FieldKind::categorical: {
                std::size_t hot = spec.categories.size();
                for (std::size_t i = 0; i < spec.categories.size(); ++i) {
                    if (spec.categories[i].code == value) {
                        hot = i;
                        break;
                    }
                }
                if (hot == spec.categories.size()) {
                    throw UnknownCategory(field_name(field) + " code " + format_double(value) +
                                          " is not in the declared layout");
                }
                for (std::size_t i = 0; i < spec.categories.size(); ++i) {
                    coordinates.push_back(i == hot ? 1.0 : 0.0);
                    local.coordinates.push_back({field, spec.kind, spec.categories[i].label});
                }
                break;
            }
            case FieldKind::ordinal: {
                std::size_t level = spec.categories.size();
                for (std::size_t i = 0; i < spec.categories.size(); ++i) {
                    if (spec.categories[i].code == value) {
                        level = i;
                        break;
                    }
                }
                if (level == spec.categories.size()) {
                    throw UnknownCategory(field_name(field) + " level " + format_double(value) +
                                          " is not in the declared layout");
                }
                double denominator = static_cast<double>(spec.categories.size()) - 1.0;
                coordinates.push_back(denominator > 0.0 ? static_cast<double>(level) / denominator
                                                        : 0.0);
                local.coordinates.push_back({field, spec.kind, ""});
                break;
            }
            case FieldKind::count:
                throw ConfigError("count field cannot appear among demographics");
        }
    }
    if (layout) *layout = std::move(local);
    return coordinates;
}

std::vector<std::string> FeatureLayout::names() const {
    std::vector<std::string> out;
    out.reserve(coordinates.size());
    for (const auto& coordinate : coordinates) {
        std::string name = field_name(coordinate.field);
        if (coordinate.kind == FieldKind::categorical) name += "=" + coordinate.label;
        out.push_back(std::move(name));
    }
    return out;
}

DichotomyCuts resolve_cuts(const std::vector<ParticipantRecord>& train, const VariableMap& map) {
    DichotomyCuts cuts;
    for (Field field : kAllFields) {
        const FieldSpec& spec = map.fields.at(field);
        if (!spec.dichotomy || spec.dichotomy->kind != DichotomyRule::Kind::median) continue;
        if (train.empty()) throw EmptyInput("resolve_cuts: no train records");
        std::vector<double> values;
        values.reserve(train.size());
        for (const auto& record : train) values.push_back(record.value(field));
        std::sort(values.begin(), values.end());
        std::size_t n = values.size();
        double median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
        cuts.medians[field] = median;
    }
    return cuts;
}

std::string group_of(const ParticipantRecord& record, Field field, const VariableMap& map,
                     const DichotomyCuts& cuts) {
    const FieldSpec& spec = map.fields.at(field);
    if (!spec.dichotomy) {
        throw UnknownAttribute("field " + field_name(field) + " has no grouping rule");
    }
    const DichotomyRule& rule = *spec.dichotomy;
    double value = record.value(field);
    switch (rule.kind) {
        case DichotomyRule::Kind::codes:
            for (double code : rule.group_a_codes) {
                if (value == code) return rule.group_a;
            }
            return rule.group_b;
        case DichotomyRule::Kind::threshold:
            return value >= rule.threshold ? rule.group_a : rule.group_b;
        case DichotomyRule::Kind::median: {
            auto it = cuts.medians.find(field);
            if (it == cuts.medians.end()) {
                throw ConfigError("median cut for " + field_name(field) + " was not resolved");
            }
            return value >= it->second ? rule.group_a : rule.group_b;
        }
    }
    throw ConfigError("bad dichotomy kind");
}

namespace {

const std::vector<std::string>& record_columns() {
    static const std::vector<std::string> columns = {
        "id",        "gender",    "age",
        "marital_status", "race_ethnicity", "education",
        "household_income", "eat_out_count"};
    return columns;
}

}  // namespace

std::string records_to_csv(const std::vector<ParticipantRecord>& records) {
    std::string out;
    const auto& columns = record_columns();
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (c) out += ',';
        out += columns[c];
    }
    out += '\n';
    for (const auto& record : records) {
        out += std::to_string(record.id);
        for (Field field : kAllFields) {
            out += ',';
            out += format_double(record.value(field));
        }
        out += ',';
        out += std::to_string(record.eat_out_count);
        out += '\n';
    }
    return out;
}

std::vector<ParticipantRecord> records_from_csv(const std::string& text) {
    CsvDoc doc = parse_csv(text);
    XportTable table = csv_to_table(doc, record_columns(), "records", "records CSV");

    std::vector<int> indices;
    for (const auto& column : record_columns()) {
        indices.push_back(table.column_index(column));
    }

    std::vector<ParticipantRecord> records;
    records.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        ParticipantRecord record;
        for (std::size_t c = 0; c < record_columns().size(); ++c) {
            const Cell& cell = row[static_cast<std::size_t>(indices[c])];
            if (!cell.is_number()) {
                throw UnparsableNumeric("records CSV has a missing value in column " +
                                        record_columns()[c]);
            }
            if (c == 0) {
                record.id = std::llround(cell.number);
            } else if (c == record_columns().size() - 1) {
                double rounded = std::round(cell.number);
                if (std::abs(cell.number - rounded) > 1e-9 || rounded < 0 || rounded > kSupportMax) {
                    throw InvalidPmf("eat_out_count " + format_double(cell.number) +
                                     " outside support 0.." + std::to_string(kSupportMax));
                }
                record.eat_out_count = static_cast<int>(rounded);
            } else {
                record.set_value(kAllFields[c - 1], cell.number);
            }
        }
        records.push_back(record);
    }
    return records;
}

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<ParticipantRecord>& records) {
    write_file(path, records_to_csv(records));
}

std::vector<ParticipantRecord> read_records_csv(const std::filesystem::path& path) {
    return records_from_csv(read_file(path));
}

XportTable records_to_table(const std::vector<ParticipantRecord>& records) {
    XportTable table;
    table.name = "records";
    for (const auto& column : record_columns()) {
        table.variables.push_back({column, VarType::numeric, 8, ""});
    }
    for (const auto& record : records) {
        std::vector<Cell> cells;
        cells.push_back(Cell::make_number(static_cast<double>(record.id)));
        for (Field field : kAllFields) cells.push_back(Cell::make_number(record.value(field)));
        cells.push_back(Cell::make_number(record.eat_out_count));
        table.rows.push_back(std::move(cells));
    }
    return table;
}

}  // namespace foodsim
