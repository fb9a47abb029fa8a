#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "foodsim/table.hpp"

namespace foodsim {

// RFC 4180 document: first row is the header. Quoted fields may contain
// commas, escaped quotes ("") and line breaks; both LF and CRLF are fine.
struct CsvDoc {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvDoc parse_csv(std::string_view text);

std::string csv_escape(std::string_view field);

// CSV counterpart of the transport reader: columns listed in `schema` must
// exist and parse as numbers (empty fields become the missing marker), so a
// CSV export of a dataset feeds the pipeline exactly like the binary file.
// Unlisted columns stay numeric when every populated field parses, and fall
// back to text otherwise.
XportTable load_csv(const std::filesystem::path& path, const std::vector<std::string>& schema);
XportTable csv_to_table(const CsvDoc& doc, const std::vector<std::string>& schema,
                        const std::string& table_name, const std::string& source_name);

}  // namespace foodsim
