#include "foodsim/xport.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <string_view>

#include "foodsim/errors.hpp"
#include "foodsim/util.hpp"

namespace foodsim {

namespace {

constexpr std::size_t kRecordSize = 80;
constexpr std::size_t kNamestrSize = 140;

constexpr std::string_view kLibraryHeader =
    "HEADER RECORD*******LIBRARY HEADER RECORD!!!!!!!"
    "000000000000000000000000000000  ";
constexpr std::string_view kMemberPrefix =
    "HEADER RECORD*******MEMBER  HEADER RECORD!!!!!!!"
    "000000000000000001600000000";
constexpr std::string_view kDescriptorHeader =
    "HEADER RECORD*******DSCRPTR HEADER RECORD!!!!!!!"
    "000000000000000000000000000000  ";
constexpr std::string_view kNamestrPrefix =
    "HEADER RECORD*******NAMESTR HEADER RECORD!!!!!!!";
constexpr std::string_view kObsHeader =
    "HEADER RECORD*******OBS     HEADER RECORD!!!!!!!"
    "000000000000000000000000000000  ";

std::string_view record_at(std::span<const std::uint8_t> bytes, std::size_t index) {
    return std::string_view(reinterpret_cast<const char*>(bytes.data()) + index * kRecordSize,
                            kRecordSize);
}

std::string trimmed_field(std::string_view record, std::size_t offset, std::size_t length) {
    std::string_view raw = record.substr(offset, length);
    std::size_t end = raw.find_last_not_of(' ');
    if (end == std::string_view::npos) return {};
    return std::string(raw.substr(0, end + 1));
}

std::uint16_t read_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

bool all_blank(std::span<const std::uint8_t> bytes) {
    return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0x20; });
}

}  // namespace

std::optional<double> decode_ibm_double(std::span<const std::uint8_t, 8> bytes) {
    const std::uint8_t first = bytes[0];

    bool tail_zero = true;
    for (std::size_t i = 1; i < 8; ++i) {
        if (bytes[i] != 0) {
            tail_zero = false;
            break;
        }
    }
    // '.', '._' and the special missings '.A'..'.Z'.
    if (tail_zero && (first == 0x2E || first == 0x5F || (first >= 0x41 && first <= 0x5A))) {
        return std::nullopt;
    }

    std::uint64_t fraction = 0;
    for (std::size_t i = 1; i < 8; ++i) fraction = (fraction << 8) | bytes[i];
    if (fraction == 0) return 0.0;  // zero regardless of exponent byte

    const int sign = (first & 0x80) ? -1 : 1;
    const int exponent = first & 0x7F;
    // fraction / 2^56 * 16^(exponent-64)  ==  fraction * 2^(4*(exponent-64) - 56)
    double value = std::ldexp(static_cast<double>(fraction), 4 * (exponent - 64) - 56);
    return sign * value;
}

std::array<std::uint8_t, 8> encode_ibm_double(double value) {
    if (!std::isfinite(value)) throw InvalidPmf("cannot encode non-finite value");
    std::array<std::uint8_t, 8> bytes{};
    if (value == 0.0) return bytes;

    const bool negative = std::signbit(value);
    double magnitude = std::abs(value);

    int exp2 = 0;
    std::frexp(magnitude, &exp2);  // magnitude = f * 2^exp2, f in [0.5, 1)
    // Smallest exponent that keeps the 56-bit fraction below 1, i.e. the
    // hex-normalized form with a nonzero leading digit.
    int exponent = 64 + (exp2 >= 0 ? (exp2 + 3) / 4 : -((-exp2) / 4));
    if (exponent < 0 || exponent > 127) {
        throw InvalidPmf("value out of transport range: " + format_double(value));
    }

    double scaled = std::ldexp(magnitude, 56 - 4 * (exponent - 64));
    auto fraction = static_cast<std::uint64_t>(std::llround(scaled));
    if (fraction >> 56 != 0) {  // rounding crossed a hex digit boundary
        ++exponent;
        scaled = std::ldexp(magnitude, 56 - 4 * (exponent - 64));
        fraction = static_cast<std::uint64_t>(std::llround(scaled));
    }

    bytes[0] = static_cast<std::uint8_t>((negative ? 0x80 : 0x00) | (exponent & 0x7F));
    for (std::size_t i = 0; i < 7; ++i) {
        bytes[7 - i] = static_cast<std::uint8_t>(fraction >> (8 * i));
    }
    return bytes;
}

namespace {

int parse_digits(std::string_view text, const std::string& what) {
    int value = 0;
    for (char c : text) {
        if (c < '0' || c > '9') throw MalformedHeader(what + " is not numeric: '" + std::string(text) + "'");
        value = value * 10 + (c - '0');
    }
    return value;
}

struct MemberCursor {
    std::span<const std::uint8_t> bytes;
    std::size_t record = 0;  // current 80-byte record index
    std::size_t total_records = 0;

    bool done() const { return record >= total_records; }
    std::string_view peek() const { return record_at(bytes, record); }
    std::string_view take() { return record_at(bytes, record++); }
};

XportTable parse_member(MemberCursor& cursor) {
    const std::size_t member_offset = cursor.record * kRecordSize;
    std::string_view member_header = cursor.take();
    if (member_header.substr(0, kMemberPrefix.size()) != kMemberPrefix) {
        throw MalformedHeader("bad member header at byte " + std::to_string(member_offset));
    }
    int namestr_length = parse_digits(member_header.substr(75, 3), "NAMESTR length");
    if (namestr_length != static_cast<int>(kNamestrSize)) {
        throw MalformedHeader("unsupported NAMESTR length " + std::to_string(namestr_length));
    }

    if (cursor.done() || cursor.take() != kDescriptorHeader) {
        throw MalformedHeader("missing member descriptor header");
    }
    if (cursor.done()) throw TruncatedRecord("member descriptor cut short");
    std::string_view descriptor1 = cursor.take();
    if (cursor.done()) throw TruncatedRecord("member descriptor cut short");
    std::string_view descriptor2 = cursor.take();

    XportTable table;
    table.name = trimmed_field(descriptor1, 8, 8);
    table.label = trimmed_field(descriptor2, 32, 40);

    if (cursor.done()) throw TruncatedRecord("missing NAMESTR header");
    std::string_view namestr_header = cursor.take();
    if (namestr_header.substr(0, kNamestrPrefix.size()) != kNamestrPrefix) {
        throw MalformedHeader("bad NAMESTR header");
    }
    int variable_count = parse_digits(namestr_header.substr(54, 4), "variable count");
    if (variable_count < 1) throw MalformedHeader("member declares no variables");

    // NAMESTRs are packed back to back; the block is padded to the record grid.
    std::size_t namestr_bytes = static_cast<std::size_t>(variable_count) * kNamestrSize;
    std::size_t namestr_records = (namestr_bytes + kRecordSize - 1) / kRecordSize;
    if (cursor.record + namestr_records > cursor.total_records) {
        throw TruncatedRecord("NAMESTR block cut short");
    }
    const std::uint8_t* namestr_base = cursor.bytes.data() + cursor.record * kRecordSize;
    cursor.record += namestr_records;

    std::size_t row_size = 0;
    for (int v = 0; v < variable_count; ++v) {
        const std::uint8_t* entry = namestr_base + static_cast<std::size_t>(v) * kNamestrSize;
        VariableInfo info;
        std::uint16_t type_code = read_u16(entry);
        std::uint16_t stored_length = read_u16(entry + 4);
        if (type_code != 1 && type_code != 2) {
            throw MalformedHeader("variable " + std::to_string(v) + " has type code " +
                                  std::to_string(type_code));
        }
        info.type = type_code == 1 ? VarType::numeric : VarType::character;
        info.length = stored_length;
        if (info.type == VarType::numeric && (stored_length < 2 || stored_length > 8)) {
            throw MalformedHeader("numeric variable with stored length " +
                                  std::to_string(stored_length));
        }
        if (info.type == VarType::character && (stored_length < 1 || stored_length > 200)) {
            throw MalformedHeader("character variable with stored length " +
                                  std::to_string(stored_length));
        }
        std::string_view name(reinterpret_cast<const char*>(entry) + 8, 8);
        std::string_view label(reinterpret_cast<const char*>(entry) + 16, 40);
        info.name = std::string(trim(name));
        info.label = std::string(trim(label));
        row_size += stored_length;
        table.variables.push_back(std::move(info));
    }

    if (cursor.done() || cursor.take() != kObsHeader) {
        throw MalformedHeader("missing observation header for member " + table.name);
    }

    // Observation records run until the next member header or end of file.
    std::size_t obs_start = cursor.record;
    while (!cursor.done() &&
           cursor.peek().substr(0, kMemberPrefix.size()) != kMemberPrefix) {
        cursor.take();
    }
    std::span<const std::uint8_t> obs_bytes =
        cursor.bytes.subspan(obs_start * kRecordSize, (cursor.record - obs_start) * kRecordSize);

    std::size_t full_rows = obs_bytes.size() / row_size;
    std::size_t remainder = obs_bytes.size() % row_size;
    if (remainder != 0 && !all_blank(obs_bytes.subspan(full_rows * row_size))) {
        throw TruncatedRecord("member " + table.name + " observations end mid-row");
    }

    // Blank tail rows inside the final record block are padding, not data:
    // every numeric cell still holds raw ASCII blanks and every text cell is
    // empty. Real rows always decode at least one non-blank byte.
    while (full_rows > 0 && all_blank(obs_bytes.subspan((full_rows - 1) * row_size, row_size))) {
        --full_rows;
    }

    table.rows.reserve(full_rows);
    for (std::size_t r = 0; r < full_rows; ++r) {
        const std::uint8_t* row = obs_bytes.data() + r * row_size;
        std::vector<Cell> cells;
        cells.reserve(table.variables.size());
        std::size_t offset = 0;
        for (const auto& variable : table.variables) {
            auto length = static_cast<std::size_t>(variable.length);
            if (variable.type == VarType::numeric) {
                // Short stored lengths are the leading bytes of the 8-byte
                // form; zero-pad before decoding.
                std::array<std::uint8_t, 8> buffer{};
                std::memcpy(buffer.data(), row + offset, length);
                auto decoded = decode_ibm_double(std::span<const std::uint8_t, 8>(buffer));
                cells.push_back(decoded ? Cell::make_number(*decoded) : Cell::make_missing());
            } else {
                std::string_view text(reinterpret_cast<const char*>(row) + offset, length);
                std::size_t end = text.find_last_not_of(' ');
                cells.push_back(Cell::make_text(
                    end == std::string_view::npos ? std::string() : std::string(text.substr(0, end + 1))));
            }
            offset += length;
        }
        table.rows.push_back(std::move(cells));
    }
    return table;
}

}  // namespace

std::vector<XportTable> parse_library(std::span<const std::uint8_t> bytes) {
    if (bytes.size() % kRecordSize != 0) {
        throw TruncatedRecord("stream length " + std::to_string(bytes.size()) +
                              " is not a multiple of 80");
    }
    if (bytes.size() < 3 * kRecordSize) {
        throw MalformedHeader("stream too short for a transport library");
    }
    MemberCursor cursor{bytes, 0, bytes.size() / kRecordSize};

    if (cursor.take() != kLibraryHeader) {
        throw MalformedHeader("first record is not a v5 transport library header");
    }
    cursor.take();  // SAS/SASLIB/version/OS + creation timestamp
    cursor.take();  // modification timestamp

    std::vector<XportTable> members;
    while (!cursor.done()) {
        members.push_back(parse_member(cursor));
    }
    if (members.empty()) throw MalformedHeader("library contains no members");
    return members;
}

std::vector<XportTable> parse_library_file(const std::filesystem::path& path) {
    std::string contents = read_file(path);
    auto data = reinterpret_cast<const std::uint8_t*>(contents.data());
    return parse_library(std::span<const std::uint8_t>(data, contents.size()));
}

}  // namespace foodsim
