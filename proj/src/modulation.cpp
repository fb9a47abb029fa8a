#include "foodsim/modulation.hpp"

#include <algorithm>
#include <set>

#include "foodsim/csv.hpp"
#include "foodsim/errors.hpp"
#include "foodsim/toml.hpp"
#include "foodsim/util.hpp"

namespace foodsim {

Strength strength_from_name(const std::string& name) {
    if (name == "none") return Strength::none;
    if (name == "very_small") return Strength::very_small;
    if (name == "small") return Strength::small;
    throw ConfigError("unknown strength: " + name);
}

Direction direction_from_name(const std::string& name) {
    if (name == "none") return Direction::none;
    if (name == "positive") return Direction::positive;
    if (name == "negative") return Direction::negative;
    throw ConfigError("unknown direction: " + name);
}

std::string strength_name(Strength s) {
    switch (s) {
        case Strength::none: return "none";
        case Strength::very_small: return "very_small";
        case Strength::small: return "small";
    }
    return "none";
}

std::string direction_name(Direction d) {
    switch (d) {
        case Direction::none: return "none";
        case Direction::positive: return "positive";
        case Direction::negative: return "negative";
    }
    return "none";
}

double alpha_for(Strength strength, const AlphaMap& map) {
    switch (strength) {
        case Strength::none: return map.none;
        case Strength::very_small: return map.very_small;
        case Strength::small: return map.small;
    }
    return map.none;
}

void ExpertKnowledgeTable::validate() const {
    std::set<std::string> seen;
    for (const auto& rule : rules) {
        if (rule.attribute.empty()) throw ConfigError("expert rule without attribute name");
        if (rule.group_a.empty() || rule.group_b.empty()) {
            throw ConfigError("expert rule for " + rule.attribute + " is missing group names");
        }
        if (rule.group_a == rule.group_b) {
            throw ConfigError("expert rule for " + rule.attribute + " has identical groups");
        }
        if (!seen.insert(rule.attribute).second) {
            throw ConfigError("duplicate expert rule for attribute " + rule.attribute);
        }
        bool no_direction = rule.direction == Direction::none;
        bool no_strength = rule.strength == Strength::none && !rule.alpha_override;
        if (no_direction != no_strength) {
            throw ConfigError("expert rule for " + rule.attribute +
                              ": direction 'none' and strength 'none' imply each other");
        }
        if (rule.alpha_override && (*rule.alpha_override < 0.0 || *rule.alpha_override >= 1.0)) {
            throw ConfigError("alpha override for " + rule.attribute + " must be in [0,1)");
        }
    }
    if (alpha_map.none != 0.0) throw ConfigError("alpha for strength 'none' must be 0");
    if (alpha_map.very_small < 0.0 || alpha_map.very_small >= 1.0 || alpha_map.small < 0.0 ||
        alpha_map.small >= 1.0) {
        throw ConfigError("alpha values must be in [0,1)");
    }
}

const ExpertRule& ExpertKnowledgeTable::rule_for(const std::string& attribute) const {
    for (const auto& rule : rules) {
        if (rule.attribute == attribute) return rule;
    }
    throw UnknownAttribute("no expert rule for attribute '" + attribute + "'");
}

ExpertKnowledgeTable ExpertKnowledgeTable::defaults() {
    ExpertKnowledgeTable table;
    table.rules = {
        {"gender", "male", "female", Direction::positive, Strength::very_small, std::nullopt},
        {"age", "high", "low", Direction::negative, Strength::small, std::nullopt},
        {"marital_status", "married", "single", Direction::positive, Strength::small, std::nullopt},
        {"race_ethnicity", "majority", "minority", Direction::none, Strength::none, std::nullopt},
        {"education", "high", "low", Direction::positive, Strength::very_small, std::nullopt},
        {"household_income", "high", "low", Direction::none, Strength::none, std::nullopt},
    };
    table.validate();
    return table;
}

namespace {

ExpertKnowledgeTable load_toml_table(const std::filesystem::path& path) {
    toml::Table doc = toml::Table::parse_file(path);
    ExpertKnowledgeTable table;
    table.alpha_map.none = doc.get_double_or("alpha.none", 0.0);
    table.alpha_map.very_small = doc.get_double_or("alpha.very_small", 0.1);
    table.alpha_map.small = doc.get_double_or("alpha.small", 0.15);

    for (const auto& attribute : doc.children("rules")) {
        std::string prefix = "rules." + attribute + ".";
        ExpertRule rule;
        rule.attribute = attribute;
        rule.group_a = doc.get_string(prefix + "group_a");
        rule.group_b = doc.get_string(prefix + "group_b");
        rule.direction = direction_from_name(doc.get_string(prefix + "direction"));
        rule.strength = strength_from_name(doc.get_string_or(prefix + "strength", "none"));
        if (doc.contains(prefix + "alpha")) {
            rule.alpha_override = doc.get_double(prefix + "alpha");
        }
        table.rules.push_back(std::move(rule));
    }
    if (table.rules.empty()) throw ConfigError("expert table " + path.string() + " has no rules");
    table.validate();
    return table;
}

ExpertKnowledgeTable load_csv_table(const std::filesystem::path& path) {
    CsvDoc doc = parse_csv(read_file(path));
    auto column = [&](const std::string& name) {
        auto it = std::find(doc.header.begin(), doc.header.end(), name);
        if (it == doc.header.end()) {
            throw MissingColumn("expert table " + path.string() + " lacks column " + name);
        }
        return static_cast<std::size_t>(it - doc.header.begin());
    };
    std::size_t c_attribute = column("attribute");
    std::size_t c_group_a = column("group_a");
    std::size_t c_group_b = column("group_b");
    std::size_t c_direction = column("direction");
    std::size_t c_strength = column("strength");
    auto alpha_it = std::find(doc.header.begin(), doc.header.end(), "alpha");

    ExpertKnowledgeTable table;
    for (const auto& row : doc.rows) {
        if (row.size() != doc.header.size()) {
            throw TruncatedRecord("expert table row width mismatch in " + path.string());
        }
        ExpertRule rule;
        rule.attribute = std::string(trim(row[c_attribute]));
        rule.group_a = std::string(trim(row[c_group_a]));
        rule.group_b = std::string(trim(row[c_group_b]));
        rule.direction = direction_from_name(std::string(trim(row[c_direction])));
        rule.strength = strength_from_name(std::string(trim(row[c_strength])));
        if (alpha_it != doc.header.end()) {
            std::string_view raw = trim(row[static_cast<std::size_t>(alpha_it - doc.header.begin())]);
            if (!raw.empty()) {
                auto parsed = parse_double(raw);
                if (!parsed) throw UnparsableNumeric("alpha in expert table: '" + std::string(raw) + "'");
                rule.alpha_override = *parsed;
            }
        }
        table.rules.push_back(std::move(rule));
    }
    if (table.rules.empty()) throw ConfigError("expert table " + path.string() + " has no rules");
    table.validate();
    return table;
}

}  // namespace

ExpertKnowledgeTable ExpertKnowledgeTable::load(const std::filesystem::path& path) {
    std::string extension = lower(path.extension().string());
    if (extension == ".toml") return load_toml_table(path);
    if (extension == ".csv") return load_csv_table(path);
    throw ConfigError("expert table must be .toml or .csv, got " + path.string());
}

ModulationSpec resolve_spec(const ExpertKnowledgeTable& table, const std::string& attribute,
                            const std::string& group) {
    const ExpertRule& rule = table.rule_for(attribute);
    if (group != rule.group_a && group != rule.group_b) {
        throw UnknownGroup("attribute '" + attribute + "' has groups '" + rule.group_a + "'/'" +
                           rule.group_b + "', not '" + group + "'");
    }

    ModulationSpec spec;
    spec.attribute = attribute;
    spec.group = group;
    spec.alpha = rule.alpha_override ? *rule.alpha_override : alpha_for(rule.strength, table.alpha_map);
    if (rule.direction == Direction::none) {
        spec.alpha = 0.0;
        spec.more_uncertainty = false;
    } else {
        // "positive" reads: group_a carries more choice uncertainty.
        bool is_group_a = group == rule.group_a;
        bool group_a_more = rule.direction == Direction::positive;
        spec.more_uncertainty = is_group_a == group_a_more;
    }
    return spec;
}

double modulate_probability(double p, const ModulationSpec& spec) {
    if (p < 0.0 || p > 1.0) throw ConfigError("probability outside [0,1]: " + format_double(p));
    if (spec.alpha < 0.0 || spec.alpha >= 1.0) {
        throw ConfigError("alpha outside [0,1): " + format_double(spec.alpha));
    }
    if (spec.alpha == 0.0) return p;  // exact identity, no float round-trip
    double factor = spec.more_uncertainty ? 1.0 - spec.alpha : 1.0 + spec.alpha;
    double shifted = factor * (p - 0.5) + 0.5;
    return std::clamp(shifted, 0.0, 1.0);
}

MixtureModel modulate_model(const MixtureModel& model, const ModulationSpec& spec) {
    model.validate();
    MixtureModel out = model;
    for (auto& component : out.components) {
        component.p = modulate_probability(component.p, spec);
    }
    out.provenance.modulations.push_back(
        {spec.attribute, spec.group, spec.alpha, spec.more_uncertainty});
    return out;
}

}  // namespace foodsim
