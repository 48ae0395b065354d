#include "cumac/report.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <system_error>

#include <json.hpp>

#include "cumac/errors.hpp"

namespace cumac {

void Table::add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
        throw FormatError("row arity does not match the table header");
    }
    rows.push_back(std::move(row));
}

std::string format_double(double value) {
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc{}) {
        throw FormatError("cannot format a floating-point value");
    }
    return std::string(buffer, ptr);
}

namespace {

std::string format_int(std::int64_t value) {
    char buffer[32];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc{}) {
        throw FormatError("cannot format an integer value");
    }
    return std::string(buffer, ptr);
}

std::string csv_escape(const std::string& text) {
    if (text.find_first_of(",\"\n\r") == std::string::npos) {
        return text;
    }
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string cell_text(const Cell& cell) {
    if (const auto* s = std::get_if<std::string>(&cell)) return csv_escape(*s);
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return format_int(*i);
    return format_double(std::get<double>(cell));
}

}  // namespace

std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i != 0) out += ',';
        out += csv_escape(table.columns[i]);
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i != 0) out += ',';
            out += cell_text(row[i]);
        }
        out += '\n';
    }
    return out;
}

std::string to_json_summary(const Table& table, const std::string& config_digest,
                            std::uint64_t seed) {
    nlohmann::json doc;
    doc["config_digest"] = config_digest;
    doc["seed"] = seed;
    doc["rows"] = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json obj;
        for (std::size_t i = 0; i < row.size(); ++i) {
            const auto& name = table.columns[i];
            if (const auto* s = std::get_if<std::string>(&row[i])) {
                obj[name] = *s;
            } else if (const auto* v = std::get_if<std::int64_t>(&row[i])) {
                obj[name] = *v;
            } else {
                obj[name] = std::get<double>(row[i]);
            }
        }
        doc["rows"].push_back(std::move(obj));
    }
    return doc.dump(2) + "\n";
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    char buffer[17];
    for (int i = 15; i >= 0; --i) {
        buffer[i] = "0123456789abcdef"[hash & 0xf];
        hash >>= 4;
    }
    return std::string(buffer, 16);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
        if (ec) {
            throw FormatError("cannot create directory " +
                              p.parent_path().string() + ": " + ec.message());
        }
    }
    std::ofstream out(p, std::ios::binary);
    if (!out.good()) {
        throw FormatError("cannot open " + path + " for writing");
    }
    out << text;
    if (!out.good()) {
        throw FormatError("short write to " + path);
    }
}

}  // namespace cumac
