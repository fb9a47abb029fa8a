#include "foodsim/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <json.hpp>

#include "foodsim/errors.hpp"
#include "foodsim/util.hpp"

namespace foodsim {

namespace {

// Mass the component contributes at support point k, honoring the fold of
// everything above the top of the support into the top cell.
double component_mass_at(const BinomialComponent& c, int k, int support_max) {
    if (k < support_max) return binomial_pmf(c.n, c.p, k);
    double tail = 0.0;
    for (int i = support_max; i <= c.n; ++i) tail += binomial_pmf(c.n, c.p, i);
    return tail;
}

// Dense least squares via Householder QR, column-major `a` of size
// rows x cols with rows >= cols. Destroys its inputs.
std::vector<double> least_squares(std::vector<double> a, int rows, int cols,
                                  std::vector<double> b) {
    auto at = [&](int r, int c) -> double& {
        return a[static_cast<std::size_t>(c) * rows + r];
    };

    double max_norm = 0.0;
    for (int c = 0; c < cols; ++c) {
        double norm = 0.0;
        for (int r = 0; r < rows; ++r) norm += at(r, c) * at(r, c);
        max_norm = std::max(max_norm, std::sqrt(norm));
    }
    const double tolerance = 1e-12 * std::max(1.0, max_norm);

    std::vector<double> v(static_cast<std::size_t>(rows));
    for (int j = 0; j < cols; ++j) {
        double sigma = 0.0;
        for (int i = j; i < rows; ++i) sigma += at(i, j) * at(i, j);
        sigma = std::sqrt(sigma);
        if (sigma <= tolerance) {
            throw DegenerateSystem("rank-deficient design matrix at column " + std::to_string(j));
        }
        double alpha = at(j, j) > 0.0 ? -sigma : sigma;
        double vnorm2 = 0.0;
        for (int i = j; i < rows; ++i) {
            v[static_cast<std::size_t>(i)] = at(i, j);
            if (i == j) v[static_cast<std::size_t>(i)] -= alpha;
            vnorm2 += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
        }
        if (vnorm2 <= 0.0) continue;  // column already reduced
        for (int c = j; c < cols; ++c) {
            double dot = 0.0;
            for (int i = j; i < rows; ++i) dot += v[static_cast<std::size_t>(i)] * at(i, c);
            double scale = 2.0 * dot / vnorm2;
            for (int i = j; i < rows; ++i) at(i, c) -= scale * v[static_cast<std::size_t>(i)];
        }
        double dot = 0.0;
        for (int i = j; i < rows; ++i) dot += v[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
        double scale = 2.0 * dot / vnorm2;
        for (int i = j; i < rows; ++i) b[static_cast<std::size_t>(i)] -= scale * v[static_cast<std::size_t>(i)];
    }

    std::vector<double> x(static_cast<std::size_t>(cols), 0.0);
    for (int j = cols - 1; j >= 0; --j) {
        double sum = b[static_cast<std::size_t>(j)];
        for (int c = j + 1; c < cols; ++c) sum -= at(j, c) * x[static_cast<std::size_t>(c)];
        double diagonal = at(j, j);
        if (std::abs(diagonal) <= tolerance) {
            throw DegenerateSystem("zero pivot at column " + std::to_string(j));
        }
        x[static_cast<std::size_t>(j)] = sum / diagonal;
    }
    return x;
}

}  // namespace

BinomialComponent component_from_peak(const PeakSpec& spec) {
    if (spec.k < 0) throw InvalidPeak("peak location k must be >= 0, got " + std::to_string(spec.k));
    if (!(spec.sigma2 > 0.0)) {
        throw InvalidPeak("sigma2 must be > 0, got " + format_double(spec.sigma2));
    }

    BinomialComponent component;
    component.k_target = spec.k;
    component.sigma2 = spec.sigma2;

    if (spec.k == 0) {
        // Bernoulli special case: the variance request doubles as the
        // success probability of the single trial.
        if (spec.sigma2 >= 1.0) {
            throw InvalidPeak("k=0 requires sigma2 < 1, got " + format_double(spec.sigma2));
        }
        component.n = 1;
        component.p = spec.sigma2;
    } else {
        if (spec.sigma2 >= spec.k) {
            throw InvalidPeak("sigma2 must be < k for k >= 1, got sigma2=" +
                              format_double(spec.sigma2) + " at k=" + std::to_string(spec.k));
        }
        component.p = 1.0 - spec.sigma2 / spec.k;
        long long trials = std::llround(spec.k / component.p);
        if (trials < spec.k) trials = spec.k;
        component.n = static_cast<int>(trials);
    }

    // The construction only makes sense if the resulting binomial actually
    // peaks on the requested count.
    int mode = static_cast<int>(std::floor((component.n + 1) * component.p + 1e-9));
    if (mode != spec.k) {
        throw ModeMismatch("Binomial(" + std::to_string(component.n) + ", " +
                           format_double(component.p) + ") has mode " + std::to_string(mode) +
                           ", requested peak " + std::to_string(spec.k));
    }
    return component;
}

std::vector<double> solve_weights(const std::vector<BinomialComponent>& components,
                                  const Pmf& target, const std::vector<int>& eval_points,
                                  double lambda) {
    if (components.empty()) throw EmptyInput("solve_weights: no components");
    if (eval_points.empty()) throw EmptyInput("solve_weights: no eval points");
    if (eval_points.size() < components.size()) {
        throw DegenerateSystem("underdetermined: " + std::to_string(eval_points.size()) +
                               " eval points for " + std::to_string(components.size()) +
                               " components");
    }
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    for (int k : eval_points) {
        if (k < 0 || k > target.support_max()) {
            throw SupportMismatch("eval point " + std::to_string(k) + " outside support 0.." +
                                  std::to_string(target.support_max()));
        }
    }

    const int total = static_cast<int>(components.size());
    const int rows = static_cast<int>(eval_points.size()) + 1;  // +1 sum-to-one row

    std::vector<int> free_set(components.size());
    std::iota(free_set.begin(), free_set.end(), 0);

    std::vector<double> solution;
    while (true) {
        const int cols = static_cast<int>(free_set.size());
        std::vector<double> a(static_cast<std::size_t>(rows) * cols, 0.0);
        std::vector<double> b(static_cast<std::size_t>(rows), 0.0);
        for (int c = 0; c < cols; ++c) {
            const auto& component = components[static_cast<std::size_t>(free_set[static_cast<std::size_t>(c)])];
            for (int r = 0; r + 1 < rows; ++r) {
                a[static_cast<std::size_t>(c) * rows + r] =
                    component_mass_at(component, eval_points[static_cast<std::size_t>(r)],
                                      target.support_max());
            }
            a[static_cast<std::size_t>(c) * rows + rows - 1] = lambda;
        }
        for (int r = 0; r + 1 < rows; ++r) {
            b[static_cast<std::size_t>(r)] = target.at(eval_points[static_cast<std::size_t>(r)]);
        }
        b[static_cast<std::size_t>(rows - 1)] = lambda;

        solution = least_squares(std::move(a), rows, cols, std::move(b));

        int worst = -1;
        double worst_value = -1e-9;
        for (int c = 0; c < cols; ++c) {
            if (solution[static_cast<std::size_t>(c)] < worst_value) {
                worst_value = solution[static_cast<std::size_t>(c)];
                worst = c;
            }
        }
        if (worst < 0) break;
        free_set.erase(free_set.begin() + worst);
        if (free_set.empty()) throw DegenerateSystem("all components eliminated");
    }

    std::vector<double> weights(static_cast<std::size_t>(total), 0.0);
    for (std::size_t c = 0; c < free_set.size(); ++c) {
        weights[static_cast<std::size_t>(free_set[c])] = solution[c];
    }
    double sum = 0.0;
    for (double& w : weights) {
        if (w < 0.0) w = 0.0;  // only rounding noise survives to here
        sum += w;
    }
    if (!(sum > 0.0)) throw DegenerateSystem("weights sum to zero after projection");
    for (double& w : weights) w /= sum;
    return weights;
}

MixtureModel fit(const Pmf& target, const std::vector<PeakSpec>& specs,
                 const FitOptions& options) {
    if (specs.empty()) throw InvalidPeak("fit: no peak specs");

    MixtureModel model;
    model.support_max = target.support_max();
    model.components.reserve(specs.size());
    for (const auto& spec : specs) model.components.push_back(component_from_peak(spec));

    std::vector<int> eval_points = options.eval_points;
    if (eval_points.empty()) {
        for (const auto& spec : specs) eval_points.push_back(spec.k);
    }

    model.weights = solve_weights(model.components, target, eval_points, options.lambda);
    model.provenance.eval_points = eval_points;
    model.provenance.lambda = options.lambda;

    Pmf fitted = model.pmf();
    double residual2 = 0.0;
    for (int k : eval_points) {
        double diff = fitted.at(k) - target.at(k);
        residual2 += diff * diff;
    }
    model.provenance.residual = std::sqrt(residual2);
    model.provenance.train_hi = histogram_intersection(fitted, target);
    model.validate();
    return model;
}

std::vector<PeakSpec> suggest_peaks(const Pmf& pmf, int max_components) {
    if (max_components < 1) throw ConfigError("max_components must be >= 1");
    const auto& mass = pmf.mass();
    const int support_max = pmf.support_max();

    struct Candidate {
        int k;
        double mass;
    };
    std::vector<Candidate> candidates;
    auto consider = [&](int k) {
        double m = mass[static_cast<std::size_t>(k)];
        if (m <= 1e-12) return;  // empty cells are not events
        for (const auto& c : candidates) {
            if (c.k == k) return;
        }
        candidates.push_back({k, m});
    };

    for (int k = 0; k <= support_max; ++k) {
        bool left_ok = k == 0 || mass[static_cast<std::size_t>(k)] > mass[static_cast<std::size_t>(k - 1)];
        bool right_ok = k == support_max ||
                        mass[static_cast<std::size_t>(k)] > mass[static_cast<std::size_t>(k + 1)];
        if (left_ok && right_ok) consider(k);
    }

    // Plateaus: maximal runs of near-equal neighboring masses read as one
    // event centered on the run.
    constexpr double kPlateauTolerance = 0.005;
    int run_start = 0;
    for (int k = 1; k <= support_max + 1; ++k) {
        bool continues = k <= support_max &&
                         std::abs(mass[static_cast<std::size_t>(k)] -
                                  mass[static_cast<std::size_t>(k - 1)]) < kPlateauTolerance;
        if (continues) continue;
        if (k - 1 > run_start) consider((run_start + k - 1) / 2);
        run_start = k;
    }

    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.mass != b.mass) return a.mass > b.mass;
        return a.k < b.k;  // prefer the smaller count on ties
    });
    if (static_cast<int>(candidates.size()) > max_components) {
        candidates.resize(static_cast<std::size_t>(max_components));
    }

    std::vector<PeakSpec> specs;
    specs.reserve(candidates.size());
    for (const auto& c : candidates) {
        // Start wide (sigma2 = 1) and shrink only where a unit variance
        // would break the peak construction: k = 1 caps at k/2, and k = 0
        // needs sigma2 < 0.5 to keep the Bernoulli mode at zero.
        double sigma2 = 1.0;
        if (c.k == 0) {
            sigma2 = 0.25;
        } else if (c.k == 1) {
            sigma2 = 0.5;
        }
        specs.push_back({c.k, sigma2});
    }
    return specs;
}

void MixtureModel::validate() const {
    if (support_max < 1) throw ConfigError("model support_max must be >= 1");
    if (components.empty()) throw ConfigError("model has no components");
    if (components.size() != weights.size()) {
        throw ConfigError("model has " + std::to_string(components.size()) + " components but " +
                          std::to_string(weights.size()) + " weights");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw ConfigError("negative mixing weight " + format_double(w));
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("mixing weights sum to " + format_double(sum) + ", expected 1");
    }
    for (const auto& c : components) {
        if (c.n < 1) throw ConfigError("component has n < 1");
        if (c.p < 0.0 || c.p > 1.0) throw ConfigError("component has p outside [0,1]");
    }
}

std::string MixtureModel::to_json() const {
    nlohmann::json j;
    j["support_max"] = support_max;
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : components) {
        comps.push_back({{"k", c.k_target}, {"sigma2", c.sigma2}, {"n", c.n}, {"p", c.p}});
    }
    j["components"] = comps;
    j["weights"] = weights;

    nlohmann::json prov;
    prov["eval_points"] = provenance.eval_points;
    prov["lambda"] = provenance.lambda;
    prov["residual"] = provenance.residual;
    prov["train_hi"] = provenance.train_hi;
    if (provenance.split_seed) prov["split_seed"] = *provenance.split_seed;
    if (!provenance.modulations.empty()) {
        nlohmann::json mods = nlohmann::json::array();
        for (const auto& m : provenance.modulations) {
            mods.push_back({{"attribute", m.attribute},
                            {"group", m.group},
                            {"alpha", m.alpha},
                            {"sign", m.more_uncertainty ? "more_uncertainty" : "less_uncertainty"}});
        }
        prov["modulations"] = mods;
    }
    j["provenance"] = prov;

    if (!encoding_bounds.empty()) {
        nlohmann::json bounds;
        for (const auto& [field, b] : encoding_bounds) {
            bounds[field] = {{"min", b.min}, {"max", b.max}};
        }
        j["encoding_bounds"] = bounds;
    }
    return j.dump(2) + "\n";
}

MixtureModel MixtureModel::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("model JSON parse failure: ") + e.what());
    }

    try {
        MixtureModel model;
        model.support_max = j.at("support_max").get<int>();
        for (const auto& c : j.at("components")) {
            BinomialComponent component;
            component.k_target = c.at("k").get<int>();
            component.sigma2 = c.at("sigma2").get<double>();
            component.n = c.at("n").get<int>();
            component.p = c.at("p").get<double>();
            model.components.push_back(component);
        }
        model.weights = j.at("weights").get<std::vector<double>>();

        const auto& prov = j.at("provenance");
        model.provenance.eval_points = prov.at("eval_points").get<std::vector<int>>();
        model.provenance.lambda = prov.at("lambda").get<double>();
        model.provenance.residual = prov.at("residual").get<double>();
        model.provenance.train_hi = prov.at("train_hi").get<double>();
        if (prov.contains("split_seed")) {
            model.provenance.split_seed = prov.at("split_seed").get<std::uint64_t>();
        }
        if (prov.contains("modulations")) {
            for (const auto& m : prov.at("modulations")) {
                AppliedModulation applied;
                applied.attribute = m.at("attribute").get<std::string>();
                applied.group = m.at("group").get<std::string>();
                applied.alpha = m.at("alpha").get<double>();
                applied.more_uncertainty = m.at("sign").get<std::string>() == "more_uncertainty";
                model.provenance.modulations.push_back(applied);
            }
        }
        if (j.contains("encoding_bounds")) {
            for (const auto& [field, b] : j.at("encoding_bounds").items()) {
                model.encoding_bounds[field] = {b.at("min").get<double>(), b.at("max").get<double>()};
            }
        }
        model.validate();
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model JSON schema violation: ") + e.what());
    }
}

void MixtureModel::save(const std::string& path) const {
    write_file(path, to_json());
}

MixtureModel MixtureModel::load(const std::string& path) {
    return from_json(read_file(path));
}

}  // namespace foodsim
