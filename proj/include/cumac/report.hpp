#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace cumac {

// One table cell. Doubles render in shortest round-trip form, so a rerun
// with the same configuration serializes byte for byte.
using Cell = std::variant<std::string, std::int64_t, double>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    // Rejects a row whose arity does not match the header.
    void add_row(std::vector<Cell> row);
};

// Shortest decimal form that parses back to exactly this value.
std::string format_double(double value);

// RFC-4180 style: comma separated, header first, cells quoted only when they
// need it.
std::string to_csv(const Table& table);

// {"config_digest": ..., "rows": [...], "seed": ...} with rows as objects
// keyed by column name; keys are sorted, so output is stable.
std::string to_json_summary(const Table& table, const std::string& config_digest,
                            std::uint64_t seed);

// FNV-1a 64-bit digest as 16 hex digits; stamps a report with the
// configuration that produced it.
std::string fnv1a_hex(const std::string& text);

// Writes text to path, creating parent directories as needed.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace cumac
