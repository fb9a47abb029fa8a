#include "foodsim/csv.hpp"

#include <algorithm>

#include "foodsim/errors.hpp"
#include "foodsim/util.hpp"

namespace foodsim {

CsvDoc parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field_started && field.empty()) {
                    quoted = true;
                    field_started = true;
                } else {
                    field += c;  // stray quote mid-field, keep it literal
                }
                break;
            case ',':
                end_field();
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') break;  // CRLF, handled by \n
                end_record();
                break;
            case '\n':
                end_record();
                break;
            default:
                field += c;
                field_started = true;
                break;
        }
    }
    if (quoted) throw TruncatedRecord("CSV ends inside a quoted field");
    if (field_started || !field.empty() || !record.empty()) end_record();

    CsvDoc doc;
    if (records.empty()) return doc;
    doc.header = std::move(records.front());
    doc.rows.assign(std::make_move_iterator(records.begin() + 1),
                    std::make_move_iterator(records.end()));
    return doc;
}

std::string csv_escape(std::string_view field) {
    bool needs_quotes = field.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

XportTable csv_to_table(const CsvDoc& doc, const std::vector<std::string>& schema,
                        const std::string& table_name, const std::string& source_name) {
    if (doc.header.empty()) throw EmptyInput("CSV " + source_name + " has no header row");

    for (const auto& column : schema) {
        if (std::find(doc.header.begin(), doc.header.end(), column) == doc.header.end()) {
            throw MissingColumn("column " + column + " not found in " + source_name);
        }
    }

    const std::size_t width = doc.header.size();
    std::vector<bool> required(width, false);
    for (std::size_t c = 0; c < width; ++c) {
        required[c] = std::find(schema.begin(), schema.end(), doc.header[c]) != schema.end();
    }

    // Decide column types: schema columns are numeric by contract; others
    // are numeric when every populated field parses.
    std::vector<bool> numeric(width, true);
    for (std::size_t r = 0; r < doc.rows.size(); ++r) {
        const auto& row = doc.rows[r];
        if (row.size() != width) {
            throw TruncatedRecord(source_name + " row " + std::to_string(r + 2) + " has " +
                                  std::to_string(row.size()) + " fields, expected " +
                                  std::to_string(width));
        }
        for (std::size_t c = 0; c < width; ++c) {
            std::string_view value = trim(row[c]);
            if (value.empty()) continue;
            if (parse_double(value)) continue;
            if (required[c]) {
                throw UnparsableNumeric("column " + doc.header[c] + ", row " +
                                        std::to_string(r + 2) + " of " + source_name + ": '" +
                                        row[c] + "'");
            }
            numeric[c] = false;
        }
    }

    XportTable table;
    table.name = table_name;
    table.variables.reserve(width);
    for (std::size_t c = 0; c < width; ++c) {
        VariableInfo info;
        info.name = doc.header[c];
        info.type = numeric[c] ? VarType::numeric : VarType::character;
        info.length = numeric[c] ? 8 : 1;
        table.variables.push_back(std::move(info));
    }

    table.rows.reserve(doc.rows.size());
    for (const auto& row : doc.rows) {
        std::vector<Cell> cells;
        cells.reserve(width);
        for (std::size_t c = 0; c < width; ++c) {
            std::string_view value = trim(row[c]);
            if (numeric[c]) {
                if (value.empty()) {
                    cells.push_back(Cell::make_missing());
                } else {
                    cells.push_back(Cell::make_number(*parse_double(value)));
                }
            } else {
                cells.push_back(Cell::make_text(std::string(value)));
                table.variables[c].length =
                    std::max(table.variables[c].length, static_cast<int>(value.size()));
            }
        }
        table.rows.push_back(std::move(cells));
    }
    return table;
}

XportTable load_csv(const std::filesystem::path& path, const std::vector<std::string>& schema) {
    CsvDoc doc = parse_csv(read_file(path));
    std::string stem = lower(path.stem().string());
    return csv_to_table(doc, schema, stem, path.string());
}

}  // namespace foodsim
