#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "foodsim/errors.hpp"
#include "foodsim/mixture.hpp"
#include "foodsim/modulation.hpp"
#include "foodsim/util.hpp"

using foodsim::alpha_for;
using foodsim::AlphaMap;
using foodsim::Direction;
using foodsim::ExpertKnowledgeTable;
using foodsim::ExpertRule;
using foodsim::MixtureModel;
using foodsim::modulate_model;
using foodsim::modulate_probability;
using foodsim::ModulationSpec;
using foodsim::resolve_spec;
using foodsim::Strength;

namespace {

// The eight-component reference model with equal mixing weights.
MixtureModel reference_model() {
    MixtureModel model;
    const foodsim::PeakSpec specs[] = {{0, 0.2},  {2, 1.0},  {4, 0.8},  {5, 0.4},
                                       {7, 0.4},  {10, 0.1}, {14, 0.1}, {21, 0.1}};
    for (const auto& spec : specs) model.components.push_back(foodsim::component_from_peak(spec));
    model.weights.assign(8, 0.125);
    return model;
}

std::vector<double> ps_of(const MixtureModel& model) {
    std::vector<double> out;
    for (const auto& c : model.components) out.push_back(c.p);
    return out;
}

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

// Rule order is immaterial (lookups go through rule_for), so compare by attribute.
void check_tables_equal(const ExpertKnowledgeTable& a, const ExpertKnowledgeTable& b) {
    REQUIRE(a.rules.size() == b.rules.size());
    for (const auto& rule : a.rules) {
        CAPTURE(rule.attribute);
        const auto& other = b.rule_for(rule.attribute);
        CHECK(rule.group_a == other.group_a);
        CHECK(rule.group_b == other.group_b);
        CHECK(rule.direction == other.direction);
        CHECK(rule.strength == other.strength);
        CHECK(rule.alpha_override == other.alpha_override);
    }
    CHECK(a.alpha_map.none == b.alpha_map.none);
    CHECK(a.alpha_map.very_small == b.alpha_map.very_small);
    CHECK(a.alpha_map.small == b.alpha_map.small);
}

}  // namespace

TEST_CASE("default strength-to-alpha mapping") {
    CHECK(alpha_for(Strength::none) == 0.0);
    CHECK(alpha_for(Strength::very_small) == 0.1);
    CHECK(alpha_for(Strength::small) == 0.15);

    AlphaMap custom{0.0, 0.2, 0.4};
    CHECK(alpha_for(Strength::very_small, custom) == 0.2);
    CHECK(alpha_for(Strength::small, custom) == 0.4);
}

TEST_CASE("default expert table content") {
    auto table = ExpertKnowledgeTable::defaults();
    REQUIRE(table.rules.size() == 6);
    CHECK_NOTHROW(table.validate());

    const auto& gender = table.rule_for("gender");
    CHECK(gender.group_a == "male");
    CHECK(gender.direction == Direction::positive);
    CHECK(gender.strength == Strength::very_small);

    const auto& age = table.rule_for("age");
    CHECK(age.direction == Direction::negative);
    CHECK(age.strength == Strength::small);

    CHECK(table.rule_for("race_ethnicity").direction == Direction::none);
    CHECK(table.rule_for("household_income").direction == Direction::none);
    CHECK(table.rule_for("marital_status").strength == Strength::small);
    CHECK(table.rule_for("education").strength == Strength::very_small);

    CHECK_THROWS_AS(table.rule_for("shoe_size"), foodsim::UnknownAttribute);
}

TEST_CASE("resolve_spec translates table rows into signed alphas") {
    auto table = ExpertKnowledgeTable::defaults();

    auto male = resolve_spec(table, "gender", "male");
    CHECK(male.alpha == 0.1);
    CHECK(male.more_uncertainty);

    auto female = resolve_spec(table, "gender", "female");
    CHECK(female.alpha == 0.1);
    CHECK_FALSE(female.more_uncertainty);

    // negative direction: group_a ("high") has LESS uncertainty
    auto old_age = resolve_spec(table, "age", "high");
    CHECK(old_age.alpha == 0.15);
    CHECK_FALSE(old_age.more_uncertainty);
    CHECK(resolve_spec(table, "age", "low").more_uncertainty);

    // no stated direction: alpha collapses to zero for both groups
    CHECK(resolve_spec(table, "race_ethnicity", "majority").alpha == 0.0);
    CHECK(resolve_spec(table, "race_ethnicity", "minority").alpha == 0.0);

    CHECK_THROWS_AS(resolve_spec(table, "gender", "other"), foodsim::UnknownGroup);
    CHECK_THROWS_AS(resolve_spec(table, "weather", "male"), foodsim::UnknownAttribute);
}

TEST_CASE("per-rule alpha override wins over the strength mapping") {
    ExpertKnowledgeTable table;
    table.rules = {{"gender", "male", "female", Direction::positive, Strength::very_small, 0.3}};
    table.validate();
    CHECK(resolve_spec(table, "gender", "male").alpha == 0.3);
    CHECK(resolve_spec(table, "gender", "female").alpha == 0.3);
}

TEST_CASE("modulate_probability basics") {
    ModulationSpec more{"gender", "male", 0.1, true};
    ModulationSpec less{"gender", "female", 0.1, false};

    SUBCASE("0.5 is a fixed point") {
        CHECK(modulate_probability(0.5, more) == 0.5);
        CHECK(modulate_probability(0.5, less) == 0.5);
    }
    SUBCASE("alpha zero is the exact identity") {
        ModulationSpec none{"race_ethnicity", "majority", 0.0, false};
        for (double p : {0.0, 0.1, 0.3333333333333333, 0.9428571428571428, 1.0}) {
            CHECK(modulate_probability(p, none) == p);
        }
    }
    SUBCASE("more uncertainty contracts toward one half") {
        for (double p : {0.05, 0.2, 0.49, 0.51, 0.9, 0.99}) {
            double shifted = modulate_probability(p, more);
            CHECK(std::abs(shifted - 0.5) < std::abs(p - 0.5));
            CHECK((p > 0.5) == (shifted > 0.5));
        }
    }
    SUBCASE("less uncertainty expands away from one half, clamped") {
        CHECK(modulate_probability(0.99, less) == doctest::Approx(1.0).epsilon(1e-12));
        ModulationSpec strong_less{"age", "low", 0.15, false};
        CHECK(modulate_probability(0.05, strong_less) == 0.0);   // 1.15*(-0.45)+0.5 < 0
        CHECK(modulate_probability(0.999, strong_less) == 1.0);  // pinned at the top
    }
    SUBCASE("symmetric around one half") {
        for (double p : {0.1, 0.25, 0.42, 0.7}) {
            CHECK(modulate_probability(1.0 - p, more) ==
                  doctest::Approx(1.0 - modulate_probability(p, more)).epsilon(1e-12));
        }
    }
    SUBCASE("input validation") {
        CHECK_THROWS_AS(modulate_probability(1.2, more), foodsim::ConfigError);
        CHECK_THROWS_AS(modulate_probability(-0.1, more), foodsim::ConfigError);
        ModulationSpec bad{"gender", "male", 1.0, true};
        CHECK_THROWS_AS(modulate_probability(0.5, bad), foodsim::ConfigError);
    }
}

TEST_CASE("male modulation of the reference model") {
    auto table = ExpertKnowledgeTable::defaults();
    MixtureModel base = reference_model();
    MixtureModel male = modulate_model(base, resolve_spec(table, "gender", "male"));

    // alpha = 0.1, more uncertainty: p -> 0.9 (p - 0.5) + 0.5
    const double expected[] = {0.23, 0.5, 0.77, 0.878, 0.899, 0.941, 0.944, 0.946};
    auto ps = ps_of(male);
    REQUIRE(ps.size() == 8);
    for (std::size_t j = 0; j < 8; ++j) {
        CAPTURE(j);
        CHECK(round3(ps[j]) == expected[j]);
        CHECK(ps[j] == doctest::Approx(0.9 * (base.components[j].p - 0.5) + 0.5).epsilon(1e-12));
    }

    // base model untouched, weights and shapes carried over
    CHECK(ps_of(base)[0] == 0.2);
    CHECK(male.weights == base.weights);
    for (std::size_t j = 0; j < 8; ++j) {
        CHECK(male.components[j].n == base.components[j].n);
        CHECK(male.components[j].k_target == base.components[j].k_target);
    }
    REQUIRE(male.provenance.modulations.size() == 1);
    CHECK(male.provenance.modulations[0].attribute == "gender");
    CHECK(male.provenance.modulations[0].group == "male");
    CHECK(male.provenance.modulations[0].alpha == 0.1);
    CHECK(male.provenance.modulations[0].more_uncertainty);
}

TEST_CASE("female modulation of the reference model clamps the top components") {
    auto table = ExpertKnowledgeTable::defaults();
    MixtureModel female = modulate_model(reference_model(), resolve_spec(table, "gender", "female"));

    const double expected[] = {0.17, 0.5, 0.83, 0.962, 0.987, 1.0, 1.0, 1.0};
    auto ps = ps_of(female);
    for (std::size_t j = 0; j < 8; ++j) {
        CAPTURE(j);
        CHECK(round3(ps[j]) == expected[j]);
    }
    // the law still normalizes after clamping
    CHECK_NOTHROW(female.pmf());
    CHECK_NOTHROW(female.validate());
}

TEST_CASE("alpha zero modulation leaves the model bit-identical") {
    auto table = ExpertKnowledgeTable::defaults();
    MixtureModel base = reference_model();
    MixtureModel same = modulate_model(base, resolve_spec(table, "household_income", "high"));
    CHECK(ps_of(same) == ps_of(base));
    CHECK(same.weights == base.weights);
    REQUIRE(same.provenance.modulations.size() == 1);  // still recorded
    CHECK(same.provenance.modulations[0].alpha == 0.0);
}

TEST_CASE("composed modulations multiply their contraction factors") {
    auto table = ExpertKnowledgeTable::defaults();
    MixtureModel base = reference_model();

    auto male = resolve_spec(table, "gender", "male");          // factor 0.9
    auto married = resolve_spec(table, "marital_status", "married");  // factor 0.85

    MixtureModel ab = modulate_model(modulate_model(base, male), married);
    MixtureModel ba = modulate_model(modulate_model(base, married), male);

    for (std::size_t j = 0; j < 8; ++j) {
        double expected = 0.9 * 0.85 * (base.components[j].p - 0.5) + 0.5;
        CHECK(ab.components[j].p == doctest::Approx(expected).epsilon(1e-12));
        // contractions never clamp, so the order cannot matter
        CHECK(ab.components[j].p == doctest::Approx(ba.components[j].p).epsilon(1e-15));
    }
    CHECK(ab.provenance.modulations.size() == 2);
    CHECK(ab.provenance.modulations[0].attribute == "gender");
    CHECK(ab.provenance.modulations[1].attribute == "marital_status");
}

TEST_CASE("clamping makes expansion-first composition order dependent") {
    ModulationSpec less{"age", "low", 0.15, false};
    ModulationSpec more{"gender", "male", 0.1, true};
    double p = 0.99;
    double less_then_more = modulate_probability(modulate_probability(p, less), more);
    double more_then_less = modulate_probability(modulate_probability(p, more), less);
    CHECK(less_then_more == doctest::Approx(0.95).epsilon(1e-12));   // hit the clamp first
    CHECK(more_then_less == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(less_then_more != more_then_less);
}

TEST_CASE("expert table validation catches bad rows") {
    using foodsim::ConfigError;
    ExpertKnowledgeTable table;

    table.rules = {{"gender", "male", "female", Direction::positive, Strength::very_small, {}},
                   {"gender", "male", "female", Direction::positive, Strength::small, {}}};
    CHECK_THROWS_AS(table.validate(), ConfigError);  // duplicate attribute

    table.rules = {{"gender", "male", "male", Direction::positive, Strength::small, {}}};
    CHECK_THROWS_AS(table.validate(), ConfigError);  // identical groups

    table.rules = {{"gender", "male", "female", Direction::none, Strength::small, {}}};
    CHECK_THROWS_AS(table.validate(), ConfigError);  // direction/strength disagree

    table.rules = {{"gender", "male", "female", Direction::positive, Strength::none, {}}};
    CHECK_THROWS_AS(table.validate(), ConfigError);  // direction without strength

    table.rules = {{"gender", "male", "female", Direction::positive, Strength::small, 1.2}};
    CHECK_THROWS_AS(table.validate(), ConfigError);  // alpha outside [0,1)

    table.rules = {{"gender", "male", "female", Direction::positive, Strength::small, {}}};
    table.alpha_map.small = 1.0;
    CHECK_THROWS_AS(table.validate(), ConfigError);
}

TEST_CASE("shipped expert table equals the built-in defaults") {
    std::filesystem::path path =
        std::filesystem::path(FOODSIM_SOURCE_DIR) / "configs" / "expert-knowledge.toml";
    check_tables_equal(ExpertKnowledgeTable::load(path), ExpertKnowledgeTable::defaults());
}

TEST_CASE("expert table loads from csv with optional alpha column") {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "foodsim_expert.csv";
    foodsim::write_file(path,
                        "attribute,group_a,group_b,direction,strength,alpha\n"
                        "gender,male,female,positive,very_small,\n"
                        "age,high,low,negative,small,\n"
                        "race_ethnicity,majority,minority,none,none,\n"
                        "custom,yes,no,positive,none,0.25\n");
    auto table = ExpertKnowledgeTable::load(path);
    fs::remove(path);

    REQUIRE(table.rules.size() == 4);
    CHECK(table.rule_for("gender").strength == Strength::very_small);
    CHECK(table.rule_for("custom").alpha_override == 0.25);
    CHECK(resolve_spec(table, "custom", "yes").alpha == 0.25);
}

TEST_CASE("expert table load errors") {
    namespace fs = std::filesystem;
    fs::path bad_ext = fs::temp_directory_path() / "foodsim_expert.txt";
    foodsim::write_file(bad_ext, "whatever");
    CHECK_THROWS_AS(ExpertKnowledgeTable::load(bad_ext), foodsim::ConfigError);
    fs::remove(bad_ext);

    fs::path no_column = fs::temp_directory_path() / "foodsim_expert_bad.csv";
    foodsim::write_file(no_column, "attribute,group_a\ngender,male\n");
    CHECK_THROWS_AS(ExpertKnowledgeTable::load(no_column), foodsim::MissingColumn);
    fs::remove(no_column);

    fs::path empty = fs::temp_directory_path() / "foodsim_expert_empty.toml";
    foodsim::write_file(empty, "[alpha]\nnone = 0.0\n");
    CHECK_THROWS_AS(ExpertKnowledgeTable::load(empty), foodsim::ConfigError);
    fs::remove(empty);
}
