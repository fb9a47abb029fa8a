#pragma once

#include <string>
#include <vector>

#include "foodsim/pmf.hpp"

namespace foodsim {

// Side-by-side table of distributions over the same support:
// k,<name1>,<name2>,... with one row per support point.
std::string pmf_table_csv(const std::vector<std::string>& names, const std::vector<Pmf>& pmfs);

// Self-contained grouped bar chart (static SVG, no scripts).
std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& names,
                          const std::vector<Pmf>& pmfs);

}  // namespace foodsim
