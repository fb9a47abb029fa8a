#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "foodsim/mixture.hpp"

namespace foodsim {

enum class Strength { none, very_small, small };
enum class Direction { none, positive, negative };

Strength strength_from_name(const std::string& name);
Direction direction_from_name(const std::string& name);
std::string strength_name(Strength s);
std::string direction_name(Direction d);

// Strength -> alpha scaling. Data, not code: a config can override it.
struct AlphaMap {
    double none = 0.0;
    double very_small = 0.1;
    double small = 0.15;
};

double alpha_for(Strength strength, const AlphaMap& map = {});

// One dichotomized attribute: which of its two groups shows more choice
// uncertainty ("positive" means group_a does) and how strongly.
struct ExpertRule {
    std::string attribute;
    std::string group_a;
    std::string group_b;
    Direction direction = Direction::none;
    Strength strength = Strength::none;
    std::optional<double> alpha_override;
};

struct ExpertKnowledgeTable {
    std::vector<ExpertRule> rules;
    AlphaMap alpha_map;

    void validate() const;  // one rule per attribute; direction none <=> strength none
    const ExpertRule& rule_for(const std::string& attribute) const;

    static ExpertKnowledgeTable load(const std::filesystem::path& path);  // .toml or .csv
    static ExpertKnowledgeTable defaults();
};

// A concrete modulation to apply: push the component probabilities of one
// model toward 0.5 (more uncertainty) or away from it (less), by alpha.
struct ModulationSpec {
    std::string attribute;
    std::string group;
    double alpha = 0.0;
    bool more_uncertainty = false;
};

ModulationSpec resolve_spec(const ExpertKnowledgeTable& table, const std::string& attribute,
                            const std::string& group);

// p_hat = (1 -/+ alpha) * (p - 0.5) + 0.5, clamped into [0,1]. The "-"
// branch (more uncertainty) contracts toward the coin flip; "+" expands
// away from it. alpha = 0 is the exact identity.
double modulate_probability(double p, const ModulationSpec& spec);

// Same component counts and mixing weights, modulated probabilities.
MixtureModel modulate_model(const MixtureModel& model, const ModulationSpec& spec);

}  // namespace foodsim
