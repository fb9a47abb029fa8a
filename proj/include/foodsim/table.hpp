#pragma once

#include <string>
#include <vector>

namespace foodsim {

enum class VarType { numeric, character };

struct VariableInfo {
    std::string name;
    VarType type = VarType::numeric;
    int length = 8;  // stored bytes: 2..8 numeric, 1..200 character
    std::string label;
};

// One table cell: a number, the missing marker, or text. SAS-style special
// missing codes all collapse onto the single missing marker.
struct Cell {
    enum class Kind { number, missing, text };

    Kind kind = Kind::missing;
    double number = 0.0;
    std::string text;

    static Cell make_number(double value) { return {Kind::number, value, {}}; }
    static Cell make_missing() { return {Kind::missing, 0.0, {}}; }
    static Cell make_text(std::string value) { return {Kind::text, 0.0, std::move(value)}; }

    bool is_missing() const noexcept { return kind == Kind::missing; }
    bool is_number() const noexcept { return kind == Kind::number; }
};

struct XportTable {
    std::string name;
    std::string label;
    std::vector<VariableInfo> variables;
    std::vector<std::vector<Cell>> rows;

    // Index of the named column, or -1.
    int column_index(const std::string& column) const;

    std::size_t row_count() const noexcept { return rows.size(); }
};

}  // namespace foodsim
