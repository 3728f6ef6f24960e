#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "varprop/errors.hpp"

namespace varprop {

// Shortest round-trip decimal representation of a double.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Rectangular numeric table with a provenance header; every emitted file
// carries the config hash and master seed so reruns are auditable.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, std::string>> provenance;

    void add_row(std::vector<double> row) {
        if (row.size() != columns.size()) throw dimension_error("ResultTable: row width mismatch");
        rows.push_back(std::move(row));
    }

    std::string to_csv() const {
        std::string out;
        for (const auto& [k, v] : provenance) out += "# " + k + "=" + v + "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) out += ',';
            out += columns[i];
        }
        out += '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out += ',';
                out += format_double(row[i]);
            }
            out += '\n';
        }
        return out;
    }

    void write_csv(const std::filesystem::path& path) const { write_text_file(path, to_csv()); }

    static void write_text_file(const std::filesystem::path& path, const std::string& content) {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw io_error("cannot open " + path.string() + " for writing");
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os) throw io_error("write failed: " + path.string());
    }
};

} // namespace varprop
