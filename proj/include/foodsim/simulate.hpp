#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "foodsim/mixture.hpp"
#include "foodsim/modulation.hpp"
#include "foodsim/rng.hpp"

namespace foodsim {

// How the per-meal layer maps a binomial component onto the week grid:
//   bernoulli21  one Bernoulli(p_j) per meal slot — the count then follows
//                Binomial(support_max, p_j) rather than Binomial(n_j, p_j);
//                a deliberate reading of "21 meal decisions a week".
//   padded       n_j Bernoulli(p_j) draws plus forced at-home slots for the
//                rest of the grid, shuffled; the count law stays exactly
//                Binomial(n_j, p_j).
enum class MealMode { bernoulli21, padded };

MealMode meal_mode_from_name(const std::string& name);
std::string meal_mode_name(MealMode mode);

struct SyntheticRecord {
    std::map<std::string, std::string> demographics;  // attribute -> group
    int count = 0;
    std::optional<std::vector<std::uint8_t>> meals;   // support_max slots of 0/1
    int component_index = -1;
    std::string seed_path;  // "<seed>:<record index>"
};

// Draws a component by mixing weight, then a count from it; counts above
// the support fold onto support_max.
struct CountDraw {
    int count = 0;
    int component_index = -1;
};
CountDraw sample_count(const MixtureModel& model, RngStream& stream);

// Draws the full meal vector (sum(meals) == count by construction).
SyntheticRecord sample_meals(const MixtureModel& model, RngStream& stream, MealMode mode);

// attribute -> list of (group, probability); probabilities sum to 1.
using Marginals = std::map<std::string, std::vector<std::pair<std::string, double>>>;

struct CohortSpec {
    std::size_t size = 0;
    std::uint64_t seed = 0;
    Marginals marginals;
    // When set, the base model is modulated per record by the group drawn
    // for this attribute (the expert table decides direction and strength).
    std::string modulation_attribute;
    bool with_meals = false;
    MealMode meal_mode = MealMode::bernoulli21;
    int threads = 1;
};

// Generates spec.size records. Record i draws from streams keyed by
// (seed, i, purpose) only, so output is byte-identical for any thread
// count, and growing the cohort never changes earlier records.
std::vector<SyntheticRecord> generate_cohort(const MixtureModel& base,
                                             const ExpertKnowledgeTable& table,
                                             const CohortSpec& spec);

std::string cohort_to_csv(const std::vector<SyntheticRecord>& records, int support_max);
std::string cohort_to_jsonl(const std::vector<SyntheticRecord>& records);

}  // namespace foodsim
