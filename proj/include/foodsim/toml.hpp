#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace foodsim::toml {

// Minimal TOML reader covering the subset our config files use:
// comments, [dotted.sections], key = value with string / integer / float /
// boolean / flat-array values (arrays may span lines). Quoted keys, dates,
// inline tables and arrays-of-tables are out of scope.
class Value {
  public:
    enum class Kind { string, integer, real, boolean, array };

    Kind kind() const noexcept { return kind_; }
    const std::string& as_string() const;
    std::int64_t as_int() const;
    double as_double() const;  // accepts integers too
    bool as_bool() const;
    const std::vector<Value>& as_array() const;

    static Value make_string(std::string v);
    static Value make_int(std::int64_t v);
    static Value make_real(double v);
    static Value make_bool(bool v);
    static Value make_array(std::vector<Value> v);

  private:
    Kind kind_ = Kind::string;
    std::string string_;
    std::int64_t int_ = 0;
    double real_ = 0.0;
    bool bool_ = false;
    std::vector<Value> array_;
};

class Table {
  public:
    static Table parse(std::string_view text, const std::string& source = "<memory>");
    static Table parse_file(const std::filesystem::path& path);

    bool contains(const std::string& key) const;
    const Value* find(const std::string& key) const;  // nullptr if absent
    const Value& at(const std::string& key) const;    // ConfigError if absent

    std::string get_string(const std::string& key) const;
    std::string get_string_or(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;
    std::vector<double> get_double_array(const std::string& key) const;
    std::vector<std::string> get_string_array(const std::string& key) const;

    // Immediate child table names under prefix, e.g. children("rules") for
    // [rules.gender] and [rules.age] yields {"age", "gender"} (sorted).
    std::vector<std::string> children(const std::string& prefix) const;

    const std::map<std::string, Value>& entries() const noexcept { return entries_; }

  private:
    std::map<std::string, Value> entries_;
};

}  // namespace foodsim::toml
