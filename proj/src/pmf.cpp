#include "foodsim/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "foodsim/errors.hpp"
#include "foodsim/util.hpp"

namespace foodsim {

namespace {

constexpr double kMassTolerance = 1e-9;
constexpr int kDirectEvalMaxN = 64;

std::vector<double> parse_mass_or_throw(const std::vector<double>& mass, int support_max) {
    if (support_max < 0) throw InvalidPmf("support_max must be >= 0");
    if (mass.size() != static_cast<std::size_t>(support_max) + 1) {
        throw InvalidPmf("expected " + std::to_string(support_max + 1) + " masses, got " +
                         std::to_string(mass.size()));
    }
    return mass;
}

}  // namespace

Pmf::Pmf(int support_max, std::vector<double> mass)
    : support_max_(support_max), mass_(parse_mass_or_throw(mass, support_max)) {
    double total = 0.0;
    for (std::size_t k = 0; k < mass_.size(); ++k) {
        double& m = mass_[k];
        if (m < 0.0) {
            if (m < -1e-12) {
                throw InvalidPmf("negative mass " + format_double(m) + " at k=" +
                                 std::to_string(k));
            }
            m = 0.0;  // rounding noise from solvers
        }
        total += m;
    }
    if (std::abs(total - 1.0) > kMassTolerance) {
        throw InvalidPmf("mass sums to " + format_double(total) + ", expected 1");
    }
}

std::string Pmf::to_json() const {
    nlohmann::json array = mass_;
    return array.dump();
}

Pmf Pmf::from_json(const std::string& text, int support_max) {
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidPmf(std::string("bad JSON: ") + e.what());
    }
    if (!parsed.is_array()) throw InvalidPmf("expected a JSON array of masses");
    std::vector<double> mass;
    for (const auto& item : parsed) {
        if (!item.is_number()) throw InvalidPmf("non-numeric mass entry");
        mass.push_back(item.get<double>());
    }
    return Pmf(support_max, std::move(mass));
}

std::string Pmf::to_csv() const {
    std::string out = "k,mass\n";
    for (std::size_t k = 0; k < mass_.size(); ++k) {
        out += std::to_string(k);
        out += ',';
        out += format_double(mass_[k]);
        out += '\n';
    }
    return out;
}

Pmf Pmf::from_csv(const std::string& text, int support_max) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InvalidPmf("empty CSV");
    std::vector<double> mass(static_cast<std::size_t>(support_max) + 1, 0.0);
    std::vector<bool> seen(mass.size(), false);
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw InvalidPmf("bad CSV row: " + line);
        auto k = parse_double(line.substr(0, comma));
        auto m = parse_double(line.substr(comma + 1));
        if (!k || !m) throw InvalidPmf("bad CSV row: " + line);
        int ki = static_cast<int>(*k);
        if (ki < 0 || ki > support_max || *k != ki) {
            throw InvalidPmf("support point out of range: " + line);
        }
        mass[static_cast<std::size_t>(ki)] = *m;
        seen[static_cast<std::size_t>(ki)] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw InvalidPmf("CSV does not cover the full support");
    }
    return Pmf(support_max, std::move(mass));
}

double binomial_pmf(int n, double p, int k) {
    if (n < 1) throw InvalidPmf("binomial_pmf: n must be >= 1");
    if (p < 0.0 || p > 1.0) throw InvalidPmf("binomial_pmf: p must be in [0,1]");
    if (k < 0 || k > n) return 0.0;
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (p == 1.0) return k == n ? 1.0 : 0.0;

    if (n <= kDirectEvalMaxN) {
        // Exact-ish direct evaluation; for the n <= 21 components used in
        // practice the coefficient is an exactly representable integer.
        double coefficient = 1.0;
        int j = std::min(k, n - k);
        for (int i = 1; i <= j; ++i) {
            coefficient = coefficient * static_cast<double>(n - j + i) / static_cast<double>(i);
        }
        return coefficient * std::pow(p, k) * std::pow(1.0 - p, n - k);
    }

    double log_mass = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                      k * std::log(p) + (n - k) * std::log1p(-p);
    return std::exp(log_mass);
}

Pmf mixture_pmf(const std::vector<BinomialComponent>& components,
                const std::vector<double>& weights, int support_max) {
    if (components.empty()) throw InvalidPmf("mixture_pmf: no components");
    if (components.size() != weights.size()) {
        throw InvalidPmf("mixture_pmf: " + std::to_string(components.size()) + " components vs " +
                         std::to_string(weights.size()) + " weights");
    }
    std::vector<double> mass(static_cast<std::size_t>(support_max) + 1, 0.0);
    for (std::size_t j = 0; j < components.size(); ++j) {
        const auto& c = components[j];
        for (int k = 0; k < support_max; ++k) {
            mass[static_cast<std::size_t>(k)] += weights[j] * binomial_pmf(c.n, c.p, k);
        }
        // Fold everything at or above the top of the support into the top
        // cell, so truncation never loses mass.
        double tail = 0.0;
        for (int k = support_max; k <= c.n; ++k) tail += binomial_pmf(c.n, c.p, k);
        mass[static_cast<std::size_t>(support_max)] += weights[j] * tail;
    }
    return Pmf(support_max, std::move(mass));
}

double histogram_intersection(const Pmf& a, const Pmf& b) {
    if (a.support_max() != b.support_max()) {
        throw SupportMismatch("histogram supports differ: " + std::to_string(a.support_max()) +
                              " vs " + std::to_string(b.support_max()));
    }
    double total = 0.0;
    for (std::size_t k = 0; k < a.mass().size(); ++k) {
        total += std::min(a.mass()[k], b.mass()[k]);
    }
    return total;
}

}  // namespace foodsim
