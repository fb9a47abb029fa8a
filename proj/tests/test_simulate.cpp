#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "foodsim/errors.hpp"
#include "foodsim/mixture.hpp"
#include "foodsim/modulation.hpp"
#include "foodsim/rng.hpp"
#include "foodsim/simulate.hpp"
#include "support/oracles.hpp"

using foodsim::CohortSpec;
using foodsim::ExpertKnowledgeTable;
using foodsim::generate_cohort;
using foodsim::MealMode;
using foodsim::MixtureModel;
using foodsim::RngStream;
using foodsim::sample_count;
using foodsim::sample_meals;
using foodsim::StreamPurpose;
using foodsim::SyntheticRecord;

namespace {

MixtureModel single_component_model(int k, double sigma2) {
    MixtureModel model;
    model.components = {foodsim::component_from_peak({k, sigma2})};
    model.weights = {1.0};
    return model;
}

MixtureModel reference_model() {
    MixtureModel model;
    const std::vector<foodsim::PeakSpec> specs = {{0, 0.2}, {2, 1.0}, {4, 0.8},  {5, 0.4},
                                                  {7, 0.4}, {10, 0.1}, {14, 0.1}, {21, 0.1}};
    for (const auto& spec : specs) model.components.push_back(foodsim::component_from_peak(spec));
    model.weights.assign(specs.size(), 0.125);
    return model;
}

double empirical_hi_vs(const std::vector<int>& counts, const std::vector<double>& law) {
    std::vector<double> freq(law.size(), 0.0);
    for (int c : counts) freq[static_cast<std::size_t>(c)] += 1.0 / static_cast<double>(counts.size());
    return oracle::hist_intersection(freq, law);
}

std::vector<double> folded_law(const MixtureModel& model, int support_max) {
    std::vector<int> ns;
    std::vector<double> ps;
    for (const auto& c : model.components) {
        ns.push_back(c.n);
        ps.push_back(c.p);
    }
    return oracle::mixture_law(ns, ps, model.weights, support_max);
}

}  // namespace

TEST_CASE("meal mode names round-trip") {
    CHECK(foodsim::meal_mode_from_name("bernoulli21") == MealMode::bernoulli21);
    CHECK(foodsim::meal_mode_from_name("padded") == MealMode::padded);
    CHECK(foodsim::meal_mode_name(MealMode::bernoulli21) == "bernoulli21");
    CHECK(foodsim::meal_mode_name(MealMode::padded) == "padded");
    CHECK_THROWS_AS(foodsim::meal_mode_from_name("weekly"), foodsim::ConfigError);
}

TEST_CASE("sample_count stays on the support and matches the mixture law") {
    MixtureModel model = reference_model();
    const int n_draws = 100000;
    std::vector<int> counts;
    counts.reserve(n_draws);
    std::vector<int> component_tally(model.components.size(), 0);
    for (int i = 0; i < n_draws; ++i) {
        RngStream stream(42, static_cast<std::uint64_t>(i), StreamPurpose::count);
        auto draw = sample_count(model, stream);
        REQUIRE(draw.count >= 0);
        REQUIRE(draw.count <= model.support_max);
        REQUIRE(draw.component_index >= 0);
        REQUIRE(draw.component_index < static_cast<int>(model.components.size()));
        counts.push_back(draw.count);
        ++component_tally[static_cast<std::size_t>(draw.component_index)];
    }

    // components are hit in proportion to their mixing weights
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
        double freq = static_cast<double>(component_tally[j]) / n_draws;
        CHECK(freq == doctest::Approx(model.weights[j]).epsilon(0.08));
    }

    CHECK(empirical_hi_vs(counts, folded_law(model, model.support_max)) >= 0.99);
}

TEST_CASE("sample_count folds counts above the support into the top cell") {
    // k=20 with sigma2=10 gives p=0.5 and n=40, well past the 21-slot week.
    MixtureModel model = single_component_model(20, 10.0);
    REQUIRE(model.components[0].n == 40);
    REQUIRE(model.components[0].p == 0.5);

    const int n_draws = 60000;
    std::vector<int> counts;
    counts.reserve(n_draws);
    for (int i = 0; i < n_draws; ++i) {
        RngStream stream(7, static_cast<std::uint64_t>(i), StreamPurpose::count);
        counts.push_back(sample_count(model, stream).count);
    }
    CHECK(*std::max_element(counts.begin(), counts.end()) == 21);

    auto law = folded_law(model, 21);
    // oracle cross-check: the folded top cell is the binomial upper tail
    auto row = oracle::binomial_row(40, 0.5);
    double tail = 0.0;
    for (std::size_t k = 21; k < row.size(); ++k) tail += row[k];
    REQUIRE(law[21] == doctest::Approx(tail).epsilon(1e-12));

    double top_freq = 0.0;
    for (int c : counts) top_freq += (c == 21) ? 1.0 / n_draws : 0.0;
    CHECK(top_freq == doctest::Approx(tail).epsilon(0.05));
    CHECK(empirical_hi_vs(counts, law) >= 0.99);
}

TEST_CASE("sample_meals always satisfies sum(meals) == count") {
    MixtureModel model = reference_model();
    for (MealMode mode : {MealMode::bernoulli21, MealMode::padded}) {
        CAPTURE(foodsim::meal_mode_name(mode));
        for (int i = 0; i < 2000; ++i) {
            RngStream stream(99, static_cast<std::uint64_t>(i), StreamPurpose::meals);
            SyntheticRecord record = sample_meals(model, stream, mode);
            REQUIRE(record.meals.has_value());
            REQUIRE(record.meals->size() == 21);
            int total = 0;
            for (auto m : *record.meals) {
                REQUIRE((m == 0 || m == 1));
                total += m;
            }
            REQUIRE(total == record.count);
        }
    }
}

TEST_CASE("meal modes induce their documented count laws") {
    // Single component k=2, sigma2=1 -> Binomial(4, 0.5).
    MixtureModel model = single_component_model(2, 1.0);
    REQUIRE(model.components[0].n == 4);

    const int n_draws = 50000;
    std::vector<int> bernoulli_counts, padded_counts;
    for (int i = 0; i < n_draws; ++i) {
        RngStream a(5, static_cast<std::uint64_t>(i), StreamPurpose::meals);
        bernoulli_counts.push_back(sample_meals(model, a, MealMode::bernoulli21).count);
        RngStream b(6, static_cast<std::uint64_t>(i), StreamPurpose::meals);
        padded_counts.push_back(sample_meals(model, b, MealMode::padded).count);
    }

    // bernoulli21: one decision per slot of the week -> Binomial(21, p)
    auto law21 = oracle::binomial_row(21, 0.5);
    law21.resize(22, 0.0);
    CHECK(empirical_hi_vs(bernoulli_counts, law21) >= 0.99);

    // padded: n Bernoulli draws plus forced at-home slots -> Binomial(n, p)
    auto law4 = oracle::binomial_row(4, 0.5);
    law4.resize(22, 0.0);
    CHECK(*std::max_element(padded_counts.begin(), padded_counts.end()) <= 4);
    CHECK(empirical_hi_vs(padded_counts, law4) >= 0.99);

    // the two laws really are different: padded can never exceed n=4
    CHECK(*std::max_element(bernoulli_counts.begin(), bernoulli_counts.end()) > 4);
}

TEST_CASE("padded mode with n above the week grid draws only 21 slots") {
    MixtureModel model = single_component_model(20, 10.0);  // n = 40
    for (int i = 0; i < 500; ++i) {
        RngStream stream(11, static_cast<std::uint64_t>(i), StreamPurpose::meals);
        auto record = sample_meals(model, stream, MealMode::padded);
        REQUIRE(record.meals->size() == 21);
        REQUIRE(record.count <= 21);
    }
}

TEST_CASE("generate_cohort is reproducible and prefix-stable") {
    MixtureModel model = reference_model();
    ExpertKnowledgeTable table = ExpertKnowledgeTable::defaults();

    CohortSpec spec;
    spec.size = 200;
    spec.seed = 20180815;
    spec.marginals["gender"] = {{"male", 0.5}, {"female", 0.5}};

    auto a = generate_cohort(model, table, spec);
    auto b = generate_cohort(model, table, spec);
    REQUIRE(a.size() == 200);
    CHECK(foodsim::cohort_to_csv(a, 21) == foodsim::cohort_to_csv(b, 21));

    // growing the cohort never rewrites earlier records
    CohortSpec bigger = spec;
    bigger.size = 450;
    auto c = generate_cohort(model, table, bigger);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(c[i].count == a[i].count);
        CHECK(c[i].component_index == a[i].component_index);
        CHECK(c[i].demographics == a[i].demographics);
        CHECK(c[i].seed_path == a[i].seed_path);
    }

    CohortSpec other_seed = spec;
    other_seed.seed = 20180816;
    auto d = generate_cohort(model, table, other_seed);
    CHECK(foodsim::cohort_to_csv(a, 21) != foodsim::cohort_to_csv(d, 21));

    CHECK(a[0].seed_path == "20180815:0");
    CHECK(a[199].seed_path == "20180815:199");
}

TEST_CASE("generate_cohort output is identical for every thread count") {
    MixtureModel model = reference_model();
    ExpertKnowledgeTable table = ExpertKnowledgeTable::defaults();

    CohortSpec spec;
    spec.size = 1003;  // odd size so chunks are uneven
    spec.seed = 31337;
    spec.marginals["gender"] = {{"male", 0.5}, {"female", 0.5}};
    spec.modulation_attribute = "gender";
    spec.with_meals = true;

    spec.threads = 1;
    std::string baseline = foodsim::cohort_to_csv(generate_cohort(model, table, spec), 21);
    for (int threads : {2, 4, 7}) {
        spec.threads = threads;
        CAPTURE(threads);
        CHECK(foodsim::cohort_to_csv(generate_cohort(model, table, spec), 21) == baseline);
    }
}

TEST_CASE("cohort demographics follow the marginals") {
    MixtureModel model = reference_model();
    ExpertKnowledgeTable table = ExpertKnowledgeTable::defaults();

    CohortSpec spec;
    spec.size = 4000;
    spec.seed = 12;
    spec.marginals["gender"] = {{"male", 0.25}, {"female", 0.75}};
    spec.marginals["age"] = {{"high", 0.6}, {"low", 0.4}};

    auto cohort = generate_cohort(model, table, spec);
    int males = 0, high = 0;
    for (const auto& record : cohort) {
        REQUIRE(record.demographics.size() == 2);
        const std::string& g = record.demographics.at("gender");
        REQUIRE((g == "male" || g == "female"));
        males += g == "male";
        high += record.demographics.at("age") == "high";
    }
    CHECK(males / 4000.0 == doctest::Approx(0.25).epsilon(0.1));
    CHECK(high / 4000.0 == doctest::Approx(0.6).epsilon(0.05));
}

TEST_CASE("modulated cohorts draw each record from its group's model") {
    MixtureModel base = reference_model();
    ExpertKnowledgeTable table = ExpertKnowledgeTable::defaults();

    CohortSpec spec;
    spec.size = 600;
    spec.seed = 777;
    spec.marginals["gender"] = {{"male", 0.5}, {"female", 0.5}};
    spec.modulation_attribute = "gender";

    auto cohort = generate_cohort(base, table, spec);

    std::map<std::string, MixtureModel> per_group;
    per_group.emplace("male", foodsim::modulate_model(base, foodsim::resolve_spec(table, "gender", "male")));
    per_group.emplace("female", foodsim::modulate_model(base, foodsim::resolve_spec(table, "gender", "female")));

    // Replay the documented stream-keying contract record by record: the
    // demographics draw and the count draw come from separate streams keyed
    // only by (seed, record index, purpose).
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        RngStream demo_stream(spec.seed, i, StreamPurpose::demographics);
        double u = demo_stream.next_double();
        std::string group = u < 0.5 ? "male" : "female";
        REQUIRE(cohort[i].demographics.at("gender") == group);

        RngStream count_stream(spec.seed, i, StreamPurpose::count);
        auto expected = sample_count(per_group.at(group), count_stream);
        REQUIRE(cohort[i].count == expected.count);
        REQUIRE(cohort[i].component_index == expected.component_index);
    }
}

TEST_CASE("generate_cohort validates its inputs") {
    MixtureModel model = reference_model();
    ExpertKnowledgeTable table = ExpertKnowledgeTable::defaults();

    CohortSpec spec;
    spec.size = 10;
    spec.seed = 1;

    SUBCASE("marginals must sum to one") {
        spec.marginals["gender"] = {{"male", 0.5}, {"female", 0.4}};
        CHECK_THROWS_AS(generate_cohort(model, table, spec), foodsim::InvalidMarginals);
    }
    SUBCASE("negative probabilities are rejected") {
        spec.marginals["gender"] = {{"male", 1.2}, {"female", -0.2}};
        CHECK_THROWS_AS(generate_cohort(model, table, spec), foodsim::InvalidMarginals);
    }
    SUBCASE("empty group lists are rejected") {
        spec.marginals["gender"] = {};
        CHECK_THROWS_AS(generate_cohort(model, table, spec), foodsim::InvalidMarginals);
    }
    SUBCASE("empty group names are rejected") {
        spec.marginals["gender"] = {{"", 1.0}};
        CHECK_THROWS_AS(generate_cohort(model, table, spec), foodsim::InvalidMarginals);
    }
    SUBCASE("modulating an attribute with no marginal is an error") {
        spec.modulation_attribute = "gender";
        CHECK_THROWS_AS(generate_cohort(model, table, spec), foodsim::InvalidMarginals);
    }
    SUBCASE("modulating by a group the expert table does not know is an error") {
        spec.marginals["gender"] = {{"male", 0.5}, {"other", 0.5}};
        spec.modulation_attribute = "gender";
        CHECK_THROWS_AS(generate_cohort(model, table, spec), foodsim::UnknownGroup);
    }
    SUBCASE("thread count must be positive") {
        spec.threads = 0;
        CHECK_THROWS_AS(generate_cohort(model, table, spec), foodsim::ConfigError);
    }
    SUBCASE("size zero is a valid empty cohort") {
        spec.size = 0;
        auto cohort = generate_cohort(model, table, spec);
        CHECK(cohort.empty());
        CHECK(foodsim::cohort_to_csv(cohort, 21) == "count,component_index,seed_path\n");
        CHECK(foodsim::cohort_to_jsonl(cohort).empty());
    }
}

TEST_CASE("cohort serialization") {
    MixtureModel model = reference_model();
    ExpertKnowledgeTable table = ExpertKnowledgeTable::defaults();

    CohortSpec spec;
    spec.size = 5;
    spec.seed = 3;
    spec.marginals["gender"] = {{"male", 0.5}, {"female", 0.5}};
    spec.marginals["age"] = {{"high", 0.5}, {"low", 0.5}};

    SUBCASE("csv without meals") {
        auto cohort = generate_cohort(model, table, spec);
        std::string csv = foodsim::cohort_to_csv(cohort, 21);
        auto header_end = csv.find('\n');
        CHECK(csv.substr(0, header_end) == "age,gender,count,component_index,seed_path");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
    }
    SUBCASE("csv with meals has one column per slot") {
        spec.with_meals = true;
        auto cohort = generate_cohort(model, table, spec);
        std::string csv = foodsim::cohort_to_csv(cohort, 21);
        auto header = csv.substr(0, csv.find('\n'));
        CHECK(header.find("m1,m2,") != std::string::npos);
        CHECK(header.find(",m21,component_index") != std::string::npos);

        // every row's meal cells sum to its count column
        std::size_t pos = csv.find('\n') + 1;
        for (const auto& record : cohort) {
            std::size_t end = csv.find('\n', pos);
            std::string line = csv.substr(pos, end - pos);
            int commas = 0, meal_sum = 0;
            for (std::size_t i = 0; i < line.size(); ++i) {
                if (line[i] == ',') {
                    ++commas;
                } else if (commas >= 3 && commas <= 23 && (line[i] == '0' || line[i] == '1') &&
                           (i + 1 == line.size() || line[i + 1] == ',')) {
                    meal_sum += line[i] - '0';
                }
            }
            CHECK(meal_sum == record.count);
            pos = end + 1;
        }
    }
    SUBCASE("jsonl lines parse and mirror the records") {
        spec.with_meals = true;
        auto cohort = generate_cohort(model, table, spec);
        std::string jsonl = foodsim::cohort_to_jsonl(cohort);
        std::size_t pos = 0;
        for (const auto& record : cohort) {
            std::size_t end = jsonl.find('\n', pos);
            REQUIRE(end != std::string::npos);
            auto j = nlohmann::json::parse(jsonl.substr(pos, end - pos));
            CHECK(j.at("count").get<int>() == record.count);
            CHECK(j.at("seed_path").get<std::string>() == record.seed_path);
            CHECK(j.at("demographics").at("gender").get<std::string>() ==
                  record.demographics.at("gender"));
            CHECK(j.at("meals").size() == 21);
            pos = end + 1;
        }
        CHECK(pos == jsonl.size());
    }
}
