#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "foodsim/csv.hpp"
#include "foodsim/dataset.hpp"
#include "foodsim/errors.hpp"
#include "foodsim/mixture.hpp"
#include "foodsim/modulation.hpp"
#include "foodsim/pmf.hpp"
#include "foodsim/report.hpp"
#include "foodsim/simulate.hpp"
#include "foodsim/toml.hpp"
#include "foodsim/util.hpp"
#include "foodsim/xport.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kSupportMax = 21;

// ---------------------------------------------------------------------------
// shared plumbing

// Resolves a --config value: as given, with .toml appended, or relative to
// $FOODSIM_CONFIG_DIR / ./configs for shipped configs by bare name.
fs::path resolve_config_path(const std::string& name) {
    std::vector<fs::path> candidates;
    candidates.emplace_back(name);
    if (fs::path(name).extension().empty()) candidates.emplace_back(name + ".toml");
    if (const char* dir = std::getenv("FOODSIM_CONFIG_DIR")) {
        candidates.emplace_back(fs::path(dir) / name);
        candidates.emplace_back(fs::path(dir) / (name + ".toml"));
    }
    candidates.emplace_back(fs::path("configs") / name);
    candidates.emplace_back(fs::path("configs") / (name + ".toml"));
    for (const auto& candidate : candidates) {
        if (fs::exists(candidate)) return candidate;
    }
    throw foodsim::IoError("config not found: " + name);
}

struct RunConfig {
    std::optional<foodsim::toml::Table> config;

    std::optional<std::vector<std::int64_t>> peaks_flag;
    std::optional<std::vector<double>> sigma2_flag;
    std::optional<double> lambda_flag;
    std::optional<std::vector<std::int64_t>> eval_points_flag;
    std::optional<double> test_fraction_flag;
    std::optional<std::uint64_t> seed_flag;
    std::optional<std::string> attribute_flag;

    void load(const std::string& config_name) {
        if (config_name.empty()) return;
        config = foodsim::toml::Table::parse_file(resolve_config_path(config_name));
    }

    std::vector<foodsim::PeakSpec> peak_specs() const {
        std::vector<double> peaks;
        std::vector<double> sigma2;
        if (peaks_flag) {
            peaks.assign(peaks_flag->begin(), peaks_flag->end());
        } else if (config && config->contains("fit.peaks")) {
            peaks = config->get_double_array("fit.peaks");
        }
        if (sigma2_flag) {
            sigma2 = *sigma2_flag;
        } else if (config && config->contains("fit.sigma2")) {
            sigma2 = config->get_double_array("fit.sigma2");
        }
        if (peaks.empty() && sigma2.empty()) return {};
        if (peaks.size() != sigma2.size()) {
            throw foodsim::ConfigError("peaks and sigma2 must have the same length (" +
                                       std::to_string(peaks.size()) + " vs " +
                                       std::to_string(sigma2.size()) + ")");
        }
        std::vector<foodsim::PeakSpec> specs;
        for (std::size_t i = 0; i < peaks.size(); ++i) {
            double k = peaks[i];
            if (k != static_cast<int>(k)) {
                throw foodsim::InvalidPeak("peak location must be an integer, got " +
                                           foodsim::format_double(k));
            }
            specs.push_back({static_cast<int>(k), sigma2[i]});
        }
        return specs;
    }

    double lambda() const {
        if (lambda_flag) return *lambda_flag;
        if (config) return config->get_double_or("fit.lambda", 1.0);
        return 1.0;
    }

    std::vector<int> eval_points() const {
        if (eval_points_flag) {
            return std::vector<int>(eval_points_flag->begin(), eval_points_flag->end());
        }
        if (config && config->contains("fit.eval_points")) {
            auto values = config->get_double_array("fit.eval_points");
            return std::vector<int>(values.begin(), values.end());
        }
        return {};
    }

    double test_fraction() const {
        if (test_fraction_flag) return *test_fraction_flag;
        if (config) return config->get_double_or("split.test_fraction", 0.33);
        return 0.33;
    }

    std::uint64_t seed() const {
        if (seed_flag) return *seed_flag;
        if (config) return static_cast<std::uint64_t>(config->get_int_or("split.seed", 2018));
        return 2018;
    }

    std::string attribute() const {
        if (attribute_flag) return *attribute_flag;
        if (config) return config->get_string_or("modulate.attribute", "");
        return "";
    }

    std::string config_path(const std::string& key) const {
        if (config && config->contains("paths." + key)) {
            return config->get_string("paths." + key);
        }
        return "";
    }
};

foodsim::VariableMap load_variable_map(const std::string& flag, const RunConfig& run) {
    std::string path = flag.empty() ? run.config_path("variable_map") : flag;
    if (path.empty()) return foodsim::VariableMap::defaults();
    return foodsim::VariableMap::load(path);
}

foodsim::ExpertKnowledgeTable load_expert_table(const std::string& flag, const RunConfig& run) {
    std::string path = flag.empty() ? run.config_path("expert_table") : flag;
    if (path.empty()) return foodsim::ExpertKnowledgeTable::defaults();
    return foodsim::ExpertKnowledgeTable::load(path);
}

// Output directory <out>/<command>-<run id>; the run id defaults to a hash
// of the resolved options, so identical invocations land on identical paths
// (and identical bytes).
fs::path prepare_run_dir(const std::string& out_base, const std::string& command,
                         const std::string& run_id, const json& resolved) {
    std::string id = run_id.empty()
                         ? foodsim::to_hex(foodsim::fnv1a64(resolved.dump())).substr(0, 12)
                         : run_id;
    fs::path dir = fs::path(out_base) / (command + "-" + id);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw foodsim::IoError("cannot create " + dir.string() + ": " + ec.message());
    return dir;
}

void write_manifest(const fs::path& dir, const std::string& command, const json& resolved,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    json manifest;
    manifest["command"] = command;
    manifest["version"] = kVersion;
    manifest["config_hash"] = foodsim::to_hex(foodsim::fnv1a64(resolved.dump()));
    manifest["resolved"] = resolved;
    manifest["inputs"] = inputs;
    manifest["outputs"] = outputs;
    foodsim::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

foodsim::XportTable load_survey_table(const fs::path& path, const foodsim::VariableMap& map) {
    std::string extension = foodsim::lower(path.extension().string());
    if (extension == ".xpt") {
        auto members = foodsim::parse_library_file(path);
        return members.front();  // survey releases ship one member per file
    }
    if (extension == ".csv") {
        foodsim::CsvDoc doc = foodsim::parse_csv(foodsim::read_file(path));
        // Mapped columns that are present must parse as numbers.
        std::vector<std::string> schema;
        std::vector<std::string> mapped = {map.id_column, map.count.column};
        for (const auto& [field, spec] : map.fields) mapped.push_back(spec.column);
        for (const auto& column : mapped) {
            if (std::find(doc.header.begin(), doc.header.end(), column) != doc.header.end()) {
                schema.push_back(column);
            }
        }
        return foodsim::csv_to_table(doc, schema, path.stem().string(), path.string());
    }
    throw foodsim::IoError("expected .xpt or .csv input, got " + path.string());
}

foodsim::Pmf load_pmf(const fs::path& path) {
    std::string extension = foodsim::lower(path.extension().string());
    std::string text = foodsim::read_file(path);
    if (extension == ".csv") return foodsim::Pmf::from_csv(text, kSupportMax);
    return foodsim::Pmf::from_json(text, kSupportMax);
}

json components_json(const foodsim::MixtureModel& model) {
    json out = json::array();
    for (std::size_t j = 0; j < model.components.size(); ++j) {
        const auto& c = model.components[j];
        out.push_back({{"k", c.k_target},
                       {"sigma2", c.sigma2},
                       {"n", c.n},
                       {"p", c.p},
                       {"weight", model.weights[j]}});
    }
    return out;
}

foodsim::Marginals parse_marginal_flags(const std::vector<std::string>& flags) {
    foodsim::Marginals marginals;
    for (const auto& flag : flags) {
        auto colon = flag.find(':');
        if (colon == std::string::npos) {
            throw foodsim::ConfigError("marginal looks like attr:group=p,group=p — got " + flag);
        }
        std::string attribute = flag.substr(0, colon);
        std::vector<std::pair<std::string, double>> groups;
        std::string rest = flag.substr(colon + 1);
        std::size_t start = 0;
        while (start <= rest.size()) {
            std::size_t comma = rest.find(',', start);
            if (comma == std::string::npos) comma = rest.size();
            std::string piece = rest.substr(start, comma - start);
            auto equals = piece.find('=');
            if (equals == std::string::npos) {
                throw foodsim::ConfigError("bad marginal entry '" + piece + "' in " + flag);
            }
            auto probability = foodsim::parse_double(piece.substr(equals + 1));
            if (!probability) {
                throw foodsim::ConfigError("bad probability in marginal entry '" + piece + "'");
            }
            groups.emplace_back(piece.substr(0, equals), *probability);
            start = comma + 1;
        }
        marginals[attribute] = std::move(groups);
    }
    return marginals;
}

struct SplitData {
    std::vector<foodsim::ParticipantRecord> records;
    std::vector<foodsim::ParticipantRecord> train;
    std::vector<foodsim::ParticipantRecord> test;
};

SplitData load_and_split(const std::string& data_path, double test_fraction, std::uint64_t seed) {
    SplitData out;
    out.records = foodsim::read_records_csv(data_path);
    auto parts = foodsim::split(out.records, test_fraction, seed);
    out.train = std::move(parts.first);
    out.test = std::move(parts.second);
    return out;
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_ingest(const std::string& demo_path, const std::string& dbq_path,
               const std::string& map_path, const std::string& out_base,
               const std::string& run_id) {
    RunConfig run;
    foodsim::VariableMap map = load_variable_map(map_path, run);

    foodsim::XportTable demo = load_survey_table(demo_path, map);
    foodsim::XportTable dbq = load_survey_table(dbq_path, map);
    foodsim::XportTable joined = foodsim::join_on_id(demo, dbq, map.id_column);

    foodsim::CleanReport report;
    auto records = foodsim::clean(joined, map, &report);

    json resolved = {{"command", "ingest"},
                     {"demo", demo_path},
                     {"dbq", dbq_path},
                     {"variable_map", map_path.empty() ? "<defaults>" : map_path}};
    fs::path dir = prepare_run_dir(out_base, "ingest", run_id, resolved);

    foodsim::write_records_csv(dir / "cleaned.csv", records);

    json report_json = json::parse(report.to_json());
    report_json["demo_rows"] = demo.row_count();
    report_json["dbq_rows"] = dbq.row_count();
    report_json["joined_rows"] = joined.row_count();
    foodsim::write_file(dir / "ingest_report.json", report_json.dump(2) + "\n");
    write_manifest(dir, "ingest", resolved, {demo_path, dbq_path},
                   {"cleaned.csv", "ingest_report.json"});

    std::cout << "ingest: " << demo.row_count() << " + " << dbq.row_count() << " rows -> "
              << joined.row_count() << " joined -> " << records.size() << " cleaned\n"
              << report.summary() << "wrote " << (dir / "cleaned.csv").string() << "\n";
    return 0;
}

int cmd_fit(const RunConfig& run, const std::string& data_path, const std::string& pmf_path,
            const std::string& map_path, int suggest, bool emit_features,
            const std::string& out_base, const std::string& run_id) {
    if (data_path.empty() == pmf_path.empty()) {
        throw foodsim::ConfigError("fit needs exactly one of --data or --pmf");
    }

    foodsim::VariableMap map = load_variable_map(map_path, run).canonical();
    std::vector<foodsim::PeakSpec> specs = run.peak_specs();

    SplitData data;
    bool from_records = !data_path.empty();
    std::optional<foodsim::Pmf> maybe_pmf;
    if (from_records) {
        data = load_and_split(data_path, run.test_fraction(), run.seed());
        if (data.train.empty()) throw foodsim::EmptyInput("train split is empty");
        maybe_pmf = foodsim::empirical_pmf(data.train, kSupportMax);
    } else {
        maybe_pmf = load_pmf(pmf_path);
    }
    const foodsim::Pmf& train_pmf = *maybe_pmf;

    if (specs.empty() && suggest > 0) specs = foodsim::suggest_peaks(train_pmf, suggest);
    if (specs.empty()) {
        throw foodsim::ConfigError("no peak specs: pass --peaks/--sigma2, a config, or --suggest");
    }

    foodsim::FitOptions options;
    options.eval_points = run.eval_points();
    options.lambda = run.lambda();
    foodsim::MixtureModel model = foodsim::fit(train_pmf, specs, options);

    json resolved = {{"command", "fit"},
                     {"data", data_path},
                     {"pmf", pmf_path},
                     {"lambda", options.lambda},
                     {"test_fraction", run.test_fraction()},
                     {"seed", run.seed()},
                     {"suggest", suggest}};
    {
        json peak_json = json::array();
        for (const auto& spec : specs) peak_json.push_back({{"k", spec.k}, {"sigma2", spec.sigma2}});
        resolved["peaks"] = peak_json;
        resolved["eval_points"] = model.provenance.eval_points;
    }

    json report = {{"train_hi", model.provenance.train_hi},
                   {"residual", model.provenance.residual},
                   {"components", components_json(model)}};

    if (from_records) {
        model.provenance.split_seed = run.seed();
        model.encoding_bounds = foodsim::compute_bounds(data.train, map);
        report["n_records"] = data.records.size();
        report["n_train"] = data.train.size();
        report["n_test"] = data.test.size();
        if (!data.test.empty()) {
            report["test_hi"] =
                foodsim::histogram_intersection(model.pmf(), foodsim::empirical_pmf(data.test, kSupportMax));
        }
    }

    fs::path dir = prepare_run_dir(out_base, "fit", run_id, resolved);
    model.save((dir / "model.json").string());
    foodsim::write_file(dir / "fit_report.json", report.dump(2) + "\n");

    std::vector<std::string> outputs = {"model.json", "fit_report.json"};
    if (emit_features && from_records) {
        auto emit = [&](const char* name, const std::vector<foodsim::ParticipantRecord>& records) {
            std::string csv;
            foodsim::FeatureLayout layout;
            for (std::size_t r = 0; r < records.size(); ++r) {
                auto coords = foodsim::encode(records[r], map, model.encoding_bounds,
                                              r == 0 ? &layout : nullptr);
                if (r == 0) {
                    csv = "id";
                    for (const auto& coordinate : layout.names()) csv += "," + coordinate;
                    csv += ",eat_out_count\n";
                }
                csv += std::to_string(records[r].id);
                for (double c : coords) csv += "," + foodsim::format_double(c);
                csv += "," + std::to_string(records[r].eat_out_count) + "\n";
            }
            foodsim::write_file(dir / name, csv);
            outputs.emplace_back(name);
        };
        emit("train_features.csv", data.train);
        emit("test_features.csv", data.test);
    }
    write_manifest(dir, "fit", resolved,
                   {data_path.empty() ? pmf_path : data_path}, outputs);

    std::cout << "fit: " << model.components.size() << " components, train HI "
              << foodsim::format_double(model.provenance.train_hi);
    if (report.contains("test_hi")) {
        std::cout << ", test HI " << foodsim::format_double(report["test_hi"].get<double>());
    }
    std::cout << "\nwrote " << (dir / "model.json").string() << "\n";
    return 0;
}

int cmd_modulate(const std::string& model_path, const std::vector<std::string>& group_specs,
                 bool compose, const std::string& table_path, const RunConfig& run,
                 const std::string& out_base, const std::string& run_id) {
    if (group_specs.empty()) {
        throw foodsim::ConfigError("modulate needs at least one --group-spec attr=group");
    }
    if (group_specs.size() > 1 && !compose) {
        throw foodsim::ConfigError("multiple --group-spec values require --compose");
    }

    foodsim::ExpertKnowledgeTable table = load_expert_table(table_path, run);
    foodsim::MixtureModel model = foodsim::MixtureModel::load(model_path);

    json applied = json::array();
    for (const auto& entry : group_specs) {
        auto equals = entry.find('=');
        if (equals == std::string::npos) {
            throw foodsim::ConfigError("--group-spec looks like attribute=group, got " + entry);
        }
        auto spec = foodsim::resolve_spec(table, entry.substr(0, equals), entry.substr(equals + 1));
        model = foodsim::modulate_model(model, spec);
        applied.push_back({{"attribute", spec.attribute},
                           {"group", spec.group},
                           {"alpha", spec.alpha},
                           {"sign", spec.more_uncertainty ? "more_uncertainty" : "less_uncertainty"}});
    }

    json resolved = {{"command", "modulate"},
                     {"model", model_path},
                     {"applied", applied},
                     {"compose", compose}};
    fs::path dir = prepare_run_dir(out_base, "modulate", run_id, resolved);
    model.save((dir / "model.json").string());
    write_manifest(dir, "modulate", resolved, {model_path}, {"model.json"});

    std::cout << "modulate: applied " << applied.size() << " spec(s)\nwrote "
              << (dir / "model.json").string() << "\n";
    return 0;
}

int cmd_simulate(const RunConfig& run, const std::string& model_path, std::size_t size,
                 std::uint64_t seed, bool with_meals, const std::string& meal_mode,
                 int threads, const std::vector<std::string>& marginal_flags,
                 const std::string& data_path, const std::string& map_path,
                 const std::string& table_path, bool jsonl, const std::string& out_base,
                 const std::string& run_id) {
    foodsim::MixtureModel model = foodsim::MixtureModel::load(model_path);
    foodsim::ExpertKnowledgeTable table = load_expert_table(table_path, run);

    foodsim::CohortSpec spec;
    spec.size = size;
    spec.seed = seed;
    spec.with_meals = with_meals;
    spec.meal_mode = foodsim::meal_mode_from_name(meal_mode);
    spec.threads = threads;
    spec.modulation_attribute = run.attribute();
    spec.marginals = parse_marginal_flags(marginal_flags);

    // Marginal for the modulated attribute: explicit flag beats data-derived
    // beats uniform over the rule's two groups.
    if (!spec.modulation_attribute.empty() &&
        spec.marginals.find(spec.modulation_attribute) == spec.marginals.end()) {
        const auto& rule = table.rule_for(spec.modulation_attribute);
        if (!data_path.empty()) {
            foodsim::VariableMap map = load_variable_map(map_path, run).canonical();
            SplitData data = load_and_split(data_path, run.test_fraction(), run.seed());
            foodsim::DichotomyCuts cuts = foodsim::resolve_cuts(data.train, map);
            foodsim::Field field = foodsim::field_from_name(spec.modulation_attribute);
            std::size_t in_group_a = 0;
            for (const auto& record : data.train) {
                if (foodsim::group_of(record, field, map, cuts) == rule.group_a) ++in_group_a;
            }
            double share = static_cast<double>(in_group_a) / static_cast<double>(data.train.size());
            spec.marginals[spec.modulation_attribute] = {{rule.group_a, share},
                                                         {rule.group_b, 1.0 - share}};
        } else {
            spec.marginals[spec.modulation_attribute] = {{rule.group_a, 0.5}, {rule.group_b, 0.5}};
        }
    }

    auto records = foodsim::generate_cohort(model, table, spec);

    json marginal_json;
    for (const auto& [attribute, groups] : spec.marginals) {
        json entries = json::array();
        for (const auto& [group, probability] : groups) {
            entries.push_back({{"group", group}, {"p", probability}});
        }
        marginal_json[attribute] = entries;
    }
    json resolved = {{"command", "simulate"}, {"model", model_path},
                     {"size", size},          {"seed", seed},
                     {"meals", with_meals},   {"meal_mode", meal_mode},
                     {"attribute", spec.modulation_attribute},
                     {"marginals", marginal_json}};

    fs::path dir = prepare_run_dir(out_base, "simulate", run_id, resolved);
    foodsim::write_file(dir / "cohort.csv", foodsim::cohort_to_csv(records, model.support_max));
    std::vector<std::string> outputs = {"cohort.csv"};
    if (jsonl) {
        foodsim::write_file(dir / "cohort.jsonl", foodsim::cohort_to_jsonl(records));
        outputs.emplace_back("cohort.jsonl");
    }
    write_manifest(dir, "simulate", resolved, {model_path}, outputs);

    std::cout << "simulate: " << records.size() << " records (seed " << seed << ", threads "
              << threads << ")\nwrote " << (dir / "cohort.csv").string() << "\n";
    return 0;
}

struct GroupEvaluation {
    json entries = json::object();
};

json evaluate_groups(const foodsim::MixtureModel& model, const foodsim::ExpertKnowledgeTable& table,
                     const foodsim::VariableMap& map, const std::string& attribute,
                     const std::vector<foodsim::ParticipantRecord>& train,
                     const std::vector<foodsim::ParticipantRecord>& test) {
    foodsim::Field field = foodsim::field_from_name(attribute);
    foodsim::DichotomyCuts cuts = foodsim::resolve_cuts(train, map);
    const auto& rule = table.rule_for(attribute);

    json out = json::object();
    for (const std::string& group : {rule.group_a, rule.group_b}) {
        auto spec = foodsim::resolve_spec(table, attribute, group);
        foodsim::MixtureModel modulated = foodsim::modulate_model(model, spec);

        std::vector<foodsim::ParticipantRecord> subset;
        for (const auto& record : test) {
            if (foodsim::group_of(record, field, map, cuts) == group) subset.push_back(record);
        }
        json entry = {{"alpha", spec.alpha},
                      {"sign", spec.more_uncertainty ? "more_uncertainty" : "less_uncertainty"},
                      {"n_test", subset.size()}};
        if (!subset.empty()) {
            entry["test_hi"] = foodsim::histogram_intersection(
                modulated.pmf(), foodsim::empirical_pmf(subset, model.support_max));
        }
        out[group] = entry;
    }
    return out;
}

int cmd_evaluate(const RunConfig& run, const std::string& model_path, const std::string& data_path,
                 const std::string& map_path, const std::string& table_path,
                 const std::vector<std::string>& attributes, const std::string& out_base,
                 const std::string& run_id) {
    foodsim::MixtureModel model = foodsim::MixtureModel::load(model_path);

    std::uint64_t seed = run.seed();
    if (!run.seed_flag && model.provenance.split_seed) seed = *model.provenance.split_seed;
    SplitData data = load_and_split(data_path, run.test_fraction(), seed);
    if (data.train.empty() || data.test.empty()) {
        throw foodsim::EmptyInput("both splits must be non-empty to evaluate");
    }

    foodsim::Pmf model_pmf = model.pmf();
    json evaluation = {
        {"n_records", data.records.size()},
        {"n_train", data.train.size()},
        {"n_test", data.test.size()},
        {"split_seed", seed},
        {"train_hi",
         foodsim::histogram_intersection(model_pmf, foodsim::empirical_pmf(data.train, model.support_max))},
        {"test_hi",
         foodsim::histogram_intersection(model_pmf, foodsim::empirical_pmf(data.test, model.support_max))},
    };

    std::vector<std::string> wanted = attributes;
    if (wanted.empty() && !run.attribute().empty()) wanted.push_back(run.attribute());
    if (!wanted.empty()) {
        foodsim::ExpertKnowledgeTable table = load_expert_table(table_path, run);
        foodsim::VariableMap map = load_variable_map(map_path, run).canonical();
        json groups = json::object();
        for (const auto& attribute : wanted) {
            groups[attribute] =
                evaluate_groups(model, table, map, attribute, data.train, data.test);
        }
        evaluation["attributes"] = groups;
    }

    json resolved = {{"command", "evaluate"},
                     {"model", model_path},
                     {"data", data_path},
                     {"test_fraction", run.test_fraction()},
                     {"seed", seed},
                     {"attributes", wanted}};
    fs::path dir = prepare_run_dir(out_base, "evaluate", run_id, resolved);
    foodsim::write_file(dir / "evaluation.json", evaluation.dump(2) + "\n");
    write_manifest(dir, "evaluate", resolved, {model_path, data_path}, {"evaluation.json"});

    std::cout << "evaluate: train HI "
              << foodsim::format_double(evaluation["train_hi"].get<double>()) << ", test HI "
              << foodsim::format_double(evaluation["test_hi"].get<double>()) << "\nwrote "
              << (dir / "evaluation.json").string() << "\n";
    return 0;
}

int cmd_report(const RunConfig& run, const std::string& model_path, const std::string& data_path,
               const std::string& out_base, const std::string& run_id) {
    foodsim::MixtureModel model = foodsim::MixtureModel::load(model_path);

    std::uint64_t seed = run.seed();
    if (!run.seed_flag && model.provenance.split_seed) seed = *model.provenance.split_seed;
    SplitData data = load_and_split(data_path, run.test_fraction(), seed);
    if (data.train.empty() || data.test.empty()) {
        throw foodsim::EmptyInput("both splits must be non-empty to report");
    }

    foodsim::Pmf train_pmf = foodsim::empirical_pmf(data.train, model.support_max);
    foodsim::Pmf test_pmf = foodsim::empirical_pmf(data.test, model.support_max);
    foodsim::Pmf model_pmf = model.pmf();

    std::vector<std::string> names = {"train", "test", "model"};
    std::vector<foodsim::Pmf> pmfs = {train_pmf, test_pmf, model_pmf};

    json report = {
        {"train_hi", foodsim::histogram_intersection(model_pmf, train_pmf)},
        {"test_hi", foodsim::histogram_intersection(model_pmf, test_pmf)},
        {"n_train", data.train.size()},
        {"n_test", data.test.size()},
        {"split_seed", seed},
        {"model_pmf", model_pmf.mass()},
        {"train_pmf", train_pmf.mass()},
        {"test_pmf", test_pmf.mass()},
    };

    json resolved = {{"command", "report"},
                     {"model", model_path},
                     {"data", data_path},
                     {"test_fraction", run.test_fraction()},
                     {"seed", seed}};
    fs::path dir = prepare_run_dir(out_base, "report", run_id, resolved);
    foodsim::write_file(dir / "report.json", report.dump(2) + "\n");
    foodsim::write_file(dir / "pmf_table.csv", foodsim::pmf_table_csv(names, pmfs));
    foodsim::write_file(dir / "distributions.svg",
                        foodsim::svg_bar_chart("weekly eat-out counts", names, pmfs));
    write_manifest(dir, "report", resolved, {model_path, data_path},
                   {"report.json", "pmf_table.csv", "distributions.svg"});

    std::cout << "report: wrote " << (dir / "report.json").string() << ", pmf_table.csv, "
              << "distributions.svg\n";
    return 0;
}

int exit_code_for(foodsim::ErrorCategory category) {
    switch (category) {
        case foodsim::ErrorCategory::io: return 2;
        case foodsim::ErrorCategory::validation: return 3;
        case foodsim::ErrorCategory::numeric: return 4;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"foodsim: binomial-mixture simulator for weekly eat-out behavior"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    // let `foodsim ingest ... --out runs` work, not just `foodsim --out runs ingest ...`
    app.fallthrough();

    std::string out_base = "runs";
    std::string run_id;
    app.add_option("--out", out_base, "base directory for run outputs")->capture_default_str();
    app.add_option("--run-id", run_id, "fixed run directory suffix (default: config hash)");

    // --- ingest
    auto* ingest = app.add_subcommand("ingest", "parse, join and clean the survey files");
    std::string demo_path, dbq_path, ingest_map;
    ingest->add_option("--demo", demo_path, "demographics file (.xpt or .csv)")->required();
    ingest->add_option("--dbq", dbq_path, "diet questionnaire file (.xpt or .csv)")->required();
    ingest->add_option("--variable-map", ingest_map, "variable map TOML (default: built in)");

    // --- fit
    auto* fit_cmd = app.add_subcommand("fit", "fit the binomial mixture to the count histogram");
    RunConfig fit_run;
    std::string fit_config, fit_data, fit_pmf, fit_map;
    int fit_suggest = 0;
    bool fit_features = false;
    fit_cmd->add_option("--config", fit_config, "experiment config TOML");
    fit_cmd->add_option("--data", fit_data, "cleaned records CSV (from ingest)");
    fit_cmd->add_option("--pmf", fit_pmf, "fit a serialized pmf directly (.json or .csv)");
    fit_cmd->add_option("--variable-map", fit_map, "variable map TOML (default: built in)");
    fit_cmd->add_option("--peaks", fit_run.peaks_flag, "peak locations (k values)")
        ->delimiter(',');
    fit_cmd->add_option("--sigma2", fit_run.sigma2_flag, "per-peak variances")->delimiter(',');
    fit_cmd->add_option("--lambda", fit_run.lambda_flag, "sum-to-one penalty weight");
    fit_cmd->add_option("--eval-points", fit_run.eval_points_flag,
                        "fit residual eval points (default: the peaks)")
        ->delimiter(',');
    fit_cmd->add_option("--test-fraction", fit_run.test_fraction_flag, "held-out fraction");
    fit_cmd->add_option("--seed", fit_run.seed_flag, "split seed");
    fit_cmd->add_option("--suggest", fit_suggest, "derive up to N peak specs from the histogram");
    fit_cmd->add_flag("--emit-features", fit_features, "write encoded train/test feature CSVs");

    // --- modulate
    auto* modulate_cmd = app.add_subcommand("modulate", "apply expert-knowledge modulation");
    RunConfig modulate_run;
    std::string modulate_config, modulate_model_path, modulate_table;
    std::vector<std::string> group_specs;
    bool compose = false;
    modulate_cmd->add_option("--config", modulate_config, "experiment config TOML");
    modulate_cmd->add_option("--model", modulate_model_path, "model JSON to modulate")->required();
    modulate_cmd->add_option("--group-spec", group_specs, "attribute=group (repeatable)");
    modulate_cmd->add_flag("--compose", compose, "allow composing several attributes");
    modulate_cmd->add_option("--expert-table", modulate_table, "expert table (.toml or .csv)");

    // --- simulate
    auto* simulate_cmd = app.add_subcommand("simulate", "generate a synthetic cohort");
    RunConfig simulate_run;
    std::string simulate_config, simulate_model_path, simulate_table, simulate_data, simulate_map;
    std::string meal_mode = "bernoulli21";
    std::vector<std::string> marginal_flags;
    std::size_t cohort_size = 0;
    std::uint64_t cohort_seed = 0;
    int threads = 1;
    bool with_meals = false;
    bool jsonl = false;
    simulate_cmd->add_option("--config", simulate_config, "experiment config TOML");
    simulate_cmd->add_option("--model", simulate_model_path, "base model JSON")->required();
    simulate_cmd->add_option("-n,--size", cohort_size, "number of records")->required();
    simulate_cmd->add_option("--seed", cohort_seed, "master seed")->required();
    simulate_cmd->add_option("--attribute", simulate_run.attribute_flag,
                             "modulate per record by this attribute");
    simulate_cmd->add_option("--marginal", marginal_flags,
                             "group marginal, attr:group=p,group=p (repeatable)");
    simulate_cmd->add_option("--data", simulate_data,
                             "cleaned records CSV for empirical marginals");
    simulate_cmd->add_option("--variable-map", simulate_map, "variable map TOML");
    simulate_cmd->add_option("--expert-table", simulate_table, "expert table (.toml or .csv)");
    simulate_cmd->add_option("--test-fraction", simulate_run.test_fraction_flag,
                             "split fraction for --data marginals");
    simulate_cmd->add_option("--split-seed", simulate_run.seed_flag,
                             "split seed for --data marginals");
    simulate_cmd->add_flag("--meals", with_meals, "draw the per-meal vector too");
    simulate_cmd->add_option("--meal-mode", meal_mode, "bernoulli21 or padded")
        ->capture_default_str();
    simulate_cmd->add_option("--threads", threads, "worker threads")->capture_default_str();
    simulate_cmd->add_flag("--jsonl", jsonl, "also write cohort.jsonl");

    // --- evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "histogram intersections on held-out data");
    RunConfig evaluate_run;
    std::string evaluate_config, evaluate_model_path, evaluate_data, evaluate_map, evaluate_table;
    std::vector<std::string> evaluate_attributes;
    evaluate_cmd->add_option("--config", evaluate_config, "experiment config TOML");
    evaluate_cmd->add_option("--model", evaluate_model_path, "model JSON")->required();
    evaluate_cmd->add_option("--data", evaluate_data, "cleaned records CSV")->required();
    evaluate_cmd->add_option("--variable-map", evaluate_map, "variable map TOML");
    evaluate_cmd->add_option("--expert-table", evaluate_table, "expert table (.toml or .csv)");
    evaluate_cmd->add_option("--attribute", evaluate_attributes,
                             "evaluate modulated models per group (repeatable)");
    evaluate_cmd->add_option("--test-fraction", evaluate_run.test_fraction_flag, "held-out fraction");
    evaluate_cmd->add_option("--seed", evaluate_run.seed_flag, "split seed");

    // --- report
    auto* report_cmd = app.add_subcommand("report", "distribution tables and charts");
    RunConfig report_run;
    std::string report_config, report_model_path, report_data;
    report_cmd->add_option("--config", report_config, "experiment config TOML");
    report_cmd->add_option("--model", report_model_path, "model JSON")->required();
    report_cmd->add_option("--data", report_data, "cleaned records CSV")->required();
    report_cmd->add_option("--test-fraction", report_run.test_fraction_flag, "held-out fraction");
    report_cmd->add_option("--seed", report_run.seed_flag, "split seed");

    try {
        app.parse(argc, argv);

        if (ingest->parsed()) {
            return cmd_ingest(demo_path, dbq_path, ingest_map, out_base, run_id);
        }
        if (fit_cmd->parsed()) {
            fit_run.load(fit_config);
            return cmd_fit(fit_run, fit_data, fit_pmf, fit_map, fit_suggest, fit_features,
                           out_base, run_id);
        }
        if (modulate_cmd->parsed()) {
            modulate_run.load(modulate_config);
            return cmd_modulate(modulate_model_path, group_specs, compose, modulate_table,
                                modulate_run, out_base, run_id);
        }
        if (simulate_cmd->parsed()) {
            simulate_run.load(simulate_config);
            return cmd_simulate(simulate_run, simulate_model_path, cohort_size, cohort_seed,
                                with_meals, meal_mode, threads, marginal_flags, simulate_data,
                                simulate_map, simulate_table, jsonl, out_base, run_id);
        }
        if (evaluate_cmd->parsed()) {
            evaluate_run.load(evaluate_config);
            return cmd_evaluate(evaluate_run, evaluate_model_path, evaluate_data, evaluate_map,
                                evaluate_table, evaluate_attributes, out_base, run_id);
        }
        if (report_cmd->parsed()) {
            report_run.load(report_config);
            return cmd_report(report_run, report_model_path, report_data, out_base, run_id);
        }
        return 1;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 3;  // bad flags are validation failures
    } catch (const foodsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.category());
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
