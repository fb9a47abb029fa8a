#include "foodsim/table.hpp"

namespace foodsim {

int XportTable::column_index(const std::string& column) const {
    for (std::size_t i = 0; i < variables.size(); ++i) {
        if (variables[i].name == column) return static_cast<int>(i);
    }
    return -1;
}

}  // namespace foodsim
