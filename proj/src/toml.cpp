#include "foodsim/toml.hpp"

#include <cctype>
#include <charconv>

#include "foodsim/errors.hpp"
#include "foodsim/util.hpp"

namespace foodsim::toml {

namespace {

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
    throw ConfigError(source + ":" + std::to_string(line) + ": " + what);
}

bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

// Strips a trailing comment, respecting quotes.
std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (c == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

struct Parser {
    std::string source;
    std::size_t line_number = 0;

    Value parse_scalar(std::string_view text) const {
        text = trim(text);
        if (text.empty()) fail(source, line_number, "empty value");
        if (text.front() == '"') {
            if (text.size() < 2 || text.back() != '"') {
                fail(source, line_number, "unterminated string");
            }
            std::string out;
            for (std::size_t i = 1; i + 1 < text.size(); ++i) {
                char c = text[i];
                if (c != '\\') {
                    out += c;
                    continue;
                }
                if (i + 2 >= text.size() + 1) fail(source, line_number, "dangling escape");
                char esc = text[++i];
                switch (esc) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    default: fail(source, line_number, std::string("unsupported escape \\") + esc);
                }
            }
            return Value::make_string(std::move(out));
        }
        if (text == "true") return Value::make_bool(true);
        if (text == "false") return Value::make_bool(false);

        std::string compact;
        for (char c : text) {
            if (c != '_') compact += c;  // 1_000 style separators
        }
        bool looks_integral = compact.find_first_of(".eE") == std::string::npos;
        if (looks_integral) {
            std::int64_t value = 0;
            auto [end, ec] = std::from_chars(compact.data(), compact.data() + compact.size(), value);
            if (ec == std::errc{} && end == compact.data() + compact.size()) {
                return Value::make_int(value);
            }
        }
        if (auto real = parse_double(compact)) return Value::make_real(*real);
        fail(source, line_number, "cannot parse value: " + std::string(text));
    }

    Value parse_value(std::string_view text) const {
        text = trim(text);
        if (!text.empty() && text.front() == '[') {
            if (text.back() != ']') fail(source, line_number, "unterminated array");
            std::string_view body = text.substr(1, text.size() - 2);
            std::vector<Value> items;
            std::size_t start = 0;
            int depth = 0;
            bool in_string = false;
            for (std::size_t i = 0; i <= body.size(); ++i) {
                bool at_end = i == body.size();
                char c = at_end ? ',' : body[i];
                if (!at_end) {
                    if (c == '"' && (i == 0 || body[i - 1] != '\\')) in_string = !in_string;
                    if (in_string) continue;
                    if (c == '[') ++depth;
                    if (c == ']') --depth;
                }
                if (c == ',' && depth == 0 && !in_string) {
                    std::string_view piece = trim(body.substr(start, i - start));
                    if (!piece.empty()) items.push_back(parse_value(piece));
                    start = i + 1;
                }
            }
            return Value::make_array(std::move(items));
        }
        return parse_scalar(text);
    }
};

}  // namespace

const std::string& Value::as_string() const {
    if (kind_ != Kind::string) throw ConfigError("TOML value is not a string");
    return string_;
}

std::int64_t Value::as_int() const {
    if (kind_ != Kind::integer) throw ConfigError("TOML value is not an integer");
    return int_;
}

double Value::as_double() const {
    if (kind_ == Kind::integer) return static_cast<double>(int_);
    if (kind_ != Kind::real) throw ConfigError("TOML value is not a number");
    return real_;
}

bool Value::as_bool() const {
    if (kind_ != Kind::boolean) throw ConfigError("TOML value is not a boolean");
    return bool_;
}

const std::vector<Value>& Value::as_array() const {
    if (kind_ != Kind::array) throw ConfigError("TOML value is not an array");
    return array_;
}

Value Value::make_string(std::string v) {
    Value out;
    out.kind_ = Kind::string;
    out.string_ = std::move(v);
    return out;
}

Value Value::make_int(std::int64_t v) {
    Value out;
    out.kind_ = Kind::integer;
    out.int_ = v;
    return out;
}

Value Value::make_real(double v) {
    Value out;
    out.kind_ = Kind::real;
    out.real_ = v;
    return out;
}

Value Value::make_bool(bool v) {
    Value out;
    out.kind_ = Kind::boolean;
    out.bool_ = v;
    return out;
}

Value Value::make_array(std::vector<Value> v) {
    Value out;
    out.kind_ = Kind::array;
    out.array_ = std::move(v);
    return out;
}

Table Table::parse(std::string_view text, const std::string& source) {
    Table table;
    Parser parser{source};
    std::string prefix;

    std::size_t pos = 0;
    std::size_t line_number = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string logical(text.substr(pos, eol - pos));
        pos = eol + 1;
        ++line_number;

        // Join continuation lines while an array is still open.
        auto open_brackets = [](std::string_view s) {
            int depth = 0;
            bool in_string = false;
            for (std::size_t i = 0; i < s.size(); ++i) {
                char c = s[i];
                if (c == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
                if (in_string) continue;
                if (c == '[') ++depth;
                if (c == ']') --depth;
            }
            return depth;
        };
        std::string stripped(strip_comment(logical));
        while (open_brackets(stripped) > 0 && pos <= text.size()) {
            std::size_t next_eol = text.find('\n', pos);
            if (next_eol == std::string_view::npos) next_eol = text.size();
            stripped += ' ';
            stripped += strip_comment(text.substr(pos, next_eol - pos));
            pos = next_eol + 1;
            ++line_number;
        }

        std::string_view line = trim(stripped);
        parser.line_number = line_number;
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                fail(source, line_number, "malformed section header: " + std::string(line));
            }
            std::string_view name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) fail(source, line_number, "empty section name");
            for (char c : name) {
                if (!is_bare_key_char(c)) {
                    fail(source, line_number, "unsupported section name: " + std::string(name));
                }
            }
            prefix = std::string(name) + ".";
            continue;
        }

        std::size_t equals = std::string_view::npos;
        {
            bool in_string = false;
            for (std::size_t i = 0; i < line.size(); ++i) {
                char c = line[i];
                if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
                if (c == '=' && !in_string) {
                    equals = i;
                    break;
                }
            }
        }
        if (equals == std::string_view::npos) {
            fail(source, line_number, "expected key = value: " + std::string(line));
        }
        std::string_view key = trim(line.substr(0, equals));
        if (key.empty()) fail(source, line_number, "empty key");
        for (char c : key) {
            if (!is_bare_key_char(c)) {
                fail(source, line_number, "unsupported key: " + std::string(key));
            }
        }
        std::string full_key = prefix + std::string(key);
        if (table.entries_.count(full_key) != 0) {
            fail(source, line_number, "duplicate key: " + full_key);
        }
        table.entries_.emplace(std::move(full_key), parser.parse_value(line.substr(equals + 1)));
    }
    return table;
}

Table Table::parse_file(const std::filesystem::path& path) {
    return parse(read_file(path), path.string());
}

bool Table::contains(const std::string& key) const {
    return entries_.count(key) != 0;
}

const Value* Table::find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

const Value& Table::at(const std::string& key) const {
    if (const Value* value = find(key)) return *value;
    throw ConfigError("missing config key: " + key);
}

std::string Table::get_string(const std::string& key) const {
    return at(key).as_string();
}

std::string Table::get_string_or(const std::string& key, const std::string& fallback) const {
    const Value* value = find(key);
    return value ? value->as_string() : fallback;
}

std::int64_t Table::get_int(const std::string& key) const {
    return at(key).as_int();
}

std::int64_t Table::get_int_or(const std::string& key, std::int64_t fallback) const {
    const Value* value = find(key);
    return value ? value->as_int() : fallback;
}

double Table::get_double(const std::string& key) const {
    return at(key).as_double();
}

double Table::get_double_or(const std::string& key, double fallback) const {
    const Value* value = find(key);
    return value ? value->as_double() : fallback;
}

bool Table::get_bool_or(const std::string& key, bool fallback) const {
    const Value* value = find(key);
    return value ? value->as_bool() : fallback;
}

std::vector<double> Table::get_double_array(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : at(key).as_array()) out.push_back(item.as_double());
    return out;
}

std::vector<std::string> Table::get_string_array(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& item : at(key).as_array()) out.push_back(item.as_string());
    return out;
}

std::vector<std::string> Table::children(const std::string& prefix) const {
    std::vector<std::string> names;
    std::string needle = prefix + ".";
    for (const auto& [key, value] : entries_) {
        if (key.rfind(needle, 0) != 0) continue;
        std::string rest = key.substr(needle.size());
        std::size_t dot = rest.find('.');
        if (dot == std::string::npos) continue;  // direct value, not a child table
        std::string child = rest.substr(0, dot);
        if (names.empty() || names.back() != child) {
            bool seen = false;
            for (const auto& n : names) {
                if (n == child) {
                    seen = true;
                    break;
                }
            }
            if (!seen) names.push_back(child);
        }
    }
    return names;
}

}  // namespace foodsim::toml
