#include "foodsim/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "foodsim/errors.hpp"
#include "foodsim/util.hpp"

namespace foodsim {

MealMode meal_mode_from_name(const std::string& name) {
    if (name == "bernoulli21") return MealMode::bernoulli21;
    if (name == "padded") return MealMode::padded;
    throw ConfigError("unknown meal mode: " + name + " (expected bernoulli21 or padded)");
}

std::string meal_mode_name(MealMode mode) {
    return mode == MealMode::bernoulli21 ? "bernoulli21" : "padded";
}

namespace {

int draw_component(const MixtureModel& model, RngStream& stream) {
    double u = stream.next_double();
    double cumulative = 0.0;
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
        cumulative += model.weights[j];
        if (u < cumulative) return static_cast<int>(j);
    }
    return static_cast<int>(model.weights.size()) - 1;  // u landed on rounding slack
}

int draw_binomial(int n, double p, RngStream& stream) {
    int successes = 0;
    for (int i = 0; i < n; ++i) {
        if (stream.bernoulli(p)) ++successes;
    }
    return successes;
}

}  // namespace

CountDraw sample_count(const MixtureModel& model, RngStream& stream) {
    model.validate();
    CountDraw draw;
    draw.component_index = draw_component(model, stream);
    const auto& component = model.components[static_cast<std::size_t>(draw.component_index)];
    draw.count = std::min(draw_binomial(component.n, component.p, stream), model.support_max);
    return draw;
}

SyntheticRecord sample_meals(const MixtureModel& model, RngStream& stream, MealMode mode) {
    model.validate();
    SyntheticRecord record;
    record.component_index = draw_component(model, stream);
    const auto& component = model.components[static_cast<std::size_t>(record.component_index)];

    const int slots = model.support_max;
    std::vector<std::uint8_t> meals(static_cast<std::size_t>(slots), 0);

    if (mode == MealMode::bernoulli21) {
        for (int i = 0; i < slots; ++i) {
            meals[static_cast<std::size_t>(i)] = stream.bernoulli(component.p) ? 1 : 0;
        }
    } else {
        // Components with n above the grid fold: only the first `slots`
        // trials can land on the week.
        int draws = std::min(component.n, slots);
        for (int i = 0; i < draws; ++i) {
            meals[static_cast<std::size_t>(i)] = stream.bernoulli(component.p) ? 1 : 0;
        }
        shuffle(meals, stream);  // spread the eat-out slots over the week
    }

    record.count = 0;
    for (std::uint8_t meal : meals) record.count += meal;
    record.meals = std::move(meals);
    return record;
}

namespace {

void validate_marginals(const Marginals& marginals) {
    for (const auto& [attribute, groups] : marginals) {
        if (groups.empty()) {
            throw InvalidMarginals("attribute " + attribute + " has no groups");
        }
        double total = 0.0;
        for (const auto& [group, probability] : groups) {
            if (group.empty()) throw InvalidMarginals("empty group name for " + attribute);
            if (probability < 0.0) {
                throw InvalidMarginals("negative probability for " + attribute + "=" + group);
            }
            total += probability;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            throw InvalidMarginals("probabilities for " + attribute + " sum to " +
                                   format_double(total));
        }
    }
}

std::string draw_group(const std::vector<std::pair<std::string, double>>& groups,
                       RngStream& stream) {
    double u = stream.next_double();
    double cumulative = 0.0;
    for (const auto& [group, probability] : groups) {
        cumulative += probability;
        if (u < cumulative) return group;
    }
    return groups.back().first;
}

}  // namespace

std::vector<SyntheticRecord> generate_cohort(const MixtureModel& base,
                                             const ExpertKnowledgeTable& table,
                                             const CohortSpec& spec) {
    base.validate();
    validate_marginals(spec.marginals);
    if (spec.threads < 1) throw ConfigError("thread count must be >= 1");

    // Modulated models are resolved up front, one per group of the
    // modulation attribute, so worker threads only read shared state.
    std::map<std::string, MixtureModel> models;
    if (!spec.modulation_attribute.empty()) {
        auto it = spec.marginals.find(spec.modulation_attribute);
        if (it == spec.marginals.end()) {
            throw InvalidMarginals("modulation attribute '" + spec.modulation_attribute +
                                   "' has no marginal distribution");
        }
        for (const auto& [group, probability] : it->second) {
            models.emplace(group,
                           modulate_model(base, resolve_spec(table, spec.modulation_attribute, group)));
        }
    }

    std::vector<SyntheticRecord> records(spec.size);

    auto fill_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            SyntheticRecord record;

            RngStream demographic_stream(spec.seed, i, StreamPurpose::demographics);
            for (const auto& [attribute, groups] : spec.marginals) {
                record.demographics[attribute] = draw_group(groups, demographic_stream);
            }

            const MixtureModel* model = &base;
            if (!spec.modulation_attribute.empty()) {
                model = &models.at(record.demographics.at(spec.modulation_attribute));
            }

            if (spec.with_meals) {
                RngStream meal_stream(spec.seed, i, StreamPurpose::meals);
                SyntheticRecord drawn = sample_meals(*model, meal_stream, spec.meal_mode);
                record.count = drawn.count;
                record.meals = std::move(drawn.meals);
                record.component_index = drawn.component_index;
            } else {
                RngStream count_stream(spec.seed, i, StreamPurpose::count);
                CountDraw drawn = sample_count(*model, count_stream);
                record.count = drawn.count;
                record.component_index = drawn.component_index;
            }

            record.seed_path = std::to_string(spec.seed) + ":" + std::to_string(i);
            records[i] = std::move(record);
        }
    };

    if (spec.threads == 1 || spec.size < 2) {
        fill_range(0, spec.size);
    } else {
        std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(spec.threads), spec.size);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        std::size_t chunk = (spec.size + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            std::size_t begin = w * chunk;
            std::size_t end = std::min(spec.size, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(fill_range, begin, end);
        }
        for (auto& thread : pool) thread.join();
    }
    return records;
}

std::string cohort_to_csv(const std::vector<SyntheticRecord>& records, int support_max) {
    std::string out;
    std::vector<std::string> attributes;
    if (!records.empty()) {
        for (const auto& [attribute, group] : records.front().demographics) {
            attributes.push_back(attribute);
        }
    }
    bool with_meals = !records.empty() && records.front().meals.has_value();

    for (const auto& attribute : attributes) {
        out += attribute;
        out += ',';
    }
    out += "count";
    if (with_meals) {
        for (int m = 1; m <= support_max; ++m) out += ",m" + std::to_string(m);
    }
    out += ",component_index,seed_path\n";

    for (const auto& record : records) {
        for (const auto& attribute : attributes) {
            out += record.demographics.at(attribute);
            out += ',';
        }
        out += std::to_string(record.count);
        if (with_meals) {
            for (std::uint8_t meal : *record.meals) {
                out += ',';
                out += meal ? '1' : '0';
            }
        }
        out += ',';
        out += std::to_string(record.component_index);
        out += ',';
        out += record.seed_path;
        out += '\n';
    }
    return out;
}

std::string cohort_to_jsonl(const std::vector<SyntheticRecord>& records) {
    std::string out;
    for (const auto& record : records) {
        nlohmann::json j;
        j["demographics"] = record.demographics;
        j["count"] = record.count;
        if (record.meals) j["meals"] = *record.meals;
        j["component_index"] = record.component_index;
        j["seed_path"] = record.seed_path;
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace foodsim
