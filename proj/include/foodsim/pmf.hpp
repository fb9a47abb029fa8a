#pragma once

#include <string>
#include <vector>

namespace foodsim {

// Probability mass function on the integer support 0..support_max.
// The constructor enforces the invariants every Pmf in the pipeline relies
// on: masses non-negative and summing to 1 within 1e-9.
class Pmf {
  public:
    Pmf(int support_max, std::vector<double> mass);

    int support_max() const noexcept { return support_max_; }
    const std::vector<double>& mass() const& noexcept { return mass_; }
    // Calling mass() on a temporary (model.pmf().mass()) must hand the vector
    // over by value: under C++20 a reference into the expired Pmf would
    // dangle inside range-for loops.
    std::vector<double> mass() && { return std::move(mass_); }
    double at(int k) const { return mass_.at(static_cast<std::size_t>(k)); }

    std::string to_json() const;             // array of support_max + 1 reals
    static Pmf from_json(const std::string& text, int support_max);

    std::string to_csv() const;              // header "k,mass"
    static Pmf from_csv(const std::string& text, int support_max);

  private:
    int support_max_;
    std::vector<double> mass_;
};

// One mixture component: counts are Binomial(n, p). k_target and sigma2
// record the peak request the component was built from.
struct BinomialComponent {
    int n = 1;
    double p = 0.0;
    int k_target = 0;
    double sigma2 = 0.0;
};

// P[X = k] for X ~ Binomial(n, p). Small n is evaluated directly; larger n
// goes through log space so n up to ~1e4 cannot overflow.
double binomial_pmf(int n, double p, int k);

// Weighted mixture of binomial components on 0..support_max; any component
// mass that falls above support_max is folded into the top cell, so the
// result always sums to 1.
Pmf mixture_pmf(const std::vector<BinomialComponent>& components,
                const std::vector<double>& weights, int support_max);

// Histogram intersection: sum_k min(a_k, b_k); 1 iff the histograms match.
double histogram_intersection(const Pmf& a, const Pmf& b);

}  // namespace foodsim
