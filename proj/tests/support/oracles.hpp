// Independent reference implementations used to cross-check the library.
// Everything here is deliberately written differently from the production
// code (recurrences instead of closed forms, exhaustive search instead of
// linear algebra) so the two sides cannot share a bug.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace oracle {

// Binomial pmf via the multiplicative recurrences
//   P(k+1) = P(k) * (n-k)/(k+1) * p/(1-p)
//   P(k-1) = P(k) * k/(n-k+1) * (1-p)/p
// anchored at the mode so the starting value cannot underflow, then
// normalized by the row total.
inline std::vector<double> binomial_row(int n, double p) {
    std::vector<double> row(static_cast<std::size_t>(n) + 1, 0.0);
    if (p <= 0.0) {
        row[0] = 1.0;
        return row;
    }
    if (p >= 1.0) {
        row[static_cast<std::size_t>(n)] = 1.0;
        return row;
    }
    const double odds = p / (1.0 - p);
    int mode = static_cast<int>((n + 1) * p);
    if (mode > n) mode = n;
    row[static_cast<std::size_t>(mode)] = 1.0;
    for (int k = mode; k + 1 <= n; ++k) {
        row[static_cast<std::size_t>(k) + 1] =
            row[static_cast<std::size_t>(k)] * odds * (n - k) / (k + 1.0);
    }
    for (int k = mode; k - 1 >= 0; --k) {
        row[static_cast<std::size_t>(k) - 1] =
            row[static_cast<std::size_t>(k)] / odds * k / (n - k + 1.0);
    }
    double total = 0.0;
    for (double v : row) total += v;
    for (double& v : row) v /= total;
    return row;
}

inline double binomial_pmf(int n, double p, int k) {
    if (k < 0 || k > n) return 0.0;
    return binomial_row(n, p)[static_cast<std::size_t>(k)];
}

// Mixture law on 0..support_max with the out-of-support tail folded into the
// top cell.
inline std::vector<double> mixture_law(const std::vector<int>& ns, const std::vector<double>& ps,
                                       const std::vector<double>& weights, int support_max) {
    std::vector<double> law(static_cast<std::size_t>(support_max) + 1, 0.0);
    for (std::size_t j = 0; j < ns.size(); ++j) {
        std::vector<double> row = binomial_row(ns[j], ps[j]);
        for (int k = 0; k <= ns[j]; ++k) {
            int cell = k < support_max ? k : support_max;
            law[static_cast<std::size_t>(cell)] += weights[j] * row[static_cast<std::size_t>(k)];
        }
    }
    return law;
}

// Penalized least-squares objective used by the fitter:
//   sum_e (A w - b)_e^2 + lambda^2 (sum w - 1)^2
inline double ls_objective(const std::vector<std::vector<double>>& columns,
                           const std::vector<double>& target, const std::vector<double>& weights,
                           double lambda) {
    double objective = 0.0;
    for (std::size_t e = 0; e < target.size(); ++e) {
        double fitted = 0.0;
        for (std::size_t j = 0; j < weights.size(); ++j) fitted += weights[j] * columns[j][e];
        objective += (fitted - target[e]) * (fitted - target[e]);
    }
    double total = 0.0;
    for (double w : weights) total += w;
    objective += lambda * lambda * (total - 1.0) * (total - 1.0);
    return objective;
}

// Exhaustive nonnegative grid search over the objective, coarse pass plus one
// local refinement. columns[j][e] is component j evaluated at eval point e.
inline std::vector<double> grid_search_weights(const std::vector<std::vector<double>>& columns,
                                               const std::vector<double>& target, double lambda,
                                               double coarse_step) {
    const std::size_t j_count = columns.size();
    std::vector<double> best(j_count, 0.0);
    double best_objective = std::numeric_limits<double>::infinity();

    std::vector<double> trial(j_count, 0.0);
    auto sweep = [&](auto&& self, std::size_t j, const std::vector<double>& lo,
                     const std::vector<double>& hi, double step) -> void {
        if (j == j_count) {
            double objective = ls_objective(columns, target, trial, lambda);
            if (objective < best_objective) {
                best_objective = objective;
                best = trial;
            }
            return;
        }
        for (double w = lo[j]; w <= hi[j] + 1e-12; w += step) {
            trial[j] = w;
            self(self, j + 1, lo, hi, step);
        }
    };

    std::vector<double> lo(j_count, 0.0);
    std::vector<double> hi(j_count, 1.0);
    sweep(sweep, 0, lo, hi, coarse_step);
    for (int refine = 0; refine < 2; ++refine) {
        double step = coarse_step / (refine == 0 ? 10.0 : 100.0);
        for (std::size_t j = 0; j < j_count; ++j) {
            lo[j] = std::max(0.0, best[j] - 12.0 * step);
            hi[j] = std::min(1.0, best[j] + 12.0 * step);
        }
        sweep(sweep, 0, lo, hi, step);
    }
    return best;
}

inline double hist_intersection(const std::vector<double>& a, const std::vector<double>& b) {
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += std::min(a[i], b[i]);
    return total;
}

}  // namespace oracle
