#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "foodsim/pmf.hpp"

namespace foodsim {

// A requested mixture peak: the count value k the component should put its
// mode on, and the variance sigma2 that controls how concentrated it is.
// Valid when sigma2 > 0 and (for k >= 1) sigma2 < k.
struct PeakSpec {
    int k = 0;
    double sigma2 = 1.0;
};

// How a model's probabilities were modulated, kept for provenance.
struct AppliedModulation {
    std::string attribute;
    std::string group;
    double alpha = 0.0;
    bool more_uncertainty = false;
};

struct Provenance {
    std::vector<int> eval_points;
    double lambda = 1.0;
    double residual = 0.0;
    double train_hi = 0.0;
    std::optional<std::uint64_t> split_seed;
    std::vector<AppliedModulation> modulations;
};

struct ContinuousBounds {
    double min = 0.0;
    double max = 1.0;
};

struct MixtureModel {
    int support_max = 21;
    std::vector<BinomialComponent> components;
    std::vector<double> weights;
    Provenance provenance;
    // Normalization bounds frozen from the split the model was fitted on,
    // so later encoding of held-out or generated data cannot drift.
    std::map<std::string, ContinuousBounds> encoding_bounds;

    Pmf pmf() const { return mixture_pmf(components, weights, support_max); }

    void validate() const;  // weights on the simplex, shapes consistent

    std::string to_json() const;
    static MixtureModel from_json(const std::string& text);
    void save(const std::string& path) const;
    static MixtureModel load(const std::string& path);
};

// Derive the binomial component whose mode sits exactly on the requested
// peak: p = 1 - sigma2/k and n = round(k/p); k = 0 degenerates to a
// Bernoulli with p = sigma2. Throws InvalidPeak / ModeMismatch.
BinomialComponent component_from_peak(const PeakSpec& spec);

// Penalized least squares for the mixing weights: minimize
//   sum_i (sum_j w_j binomial(n_j, p_j, k_i) - target(k_i))^2
//     + lambda^2 (sum_j w_j - 1)^2
// over the eval points k_i, then iteratively eliminate negative weights
// (most negative first) and finally rescale onto the simplex.
std::vector<double> solve_weights(const std::vector<BinomialComponent>& components,
                                  const Pmf& target, const std::vector<int>& eval_points,
                                  double lambda = 1.0);

struct FitOptions {
    std::vector<int> eval_points;  // empty -> use the peak locations
    double lambda = 1.0;
};

MixtureModel fit(const Pmf& target, const std::vector<PeakSpec>& specs,
                 const FitOptions& options = {});

// Candidate peaks read off an empirical pmf: strict local maxima plus
// midpoints of plateaus (runs of near-equal mass), ranked by mass.
std::vector<PeakSpec> suggest_peaks(const Pmf& pmf, int max_components);

}  // namespace foodsim
