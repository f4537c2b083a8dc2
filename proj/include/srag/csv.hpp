#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace srag {

using CsvRow = std::vector<std::string>;

/// RFC-4180-style escaping: fields containing commas, quotes or newlines are
/// quoted, embedded quotes doubled.
std::string to_csv_line(const CsvRow& row);

struct CsvTable {
    CsvRow header;
    std::vector<CsvRow> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Strict reader for the writer above; every emitted file must round-trip.
CsvTable read_csv(const std::filesystem::path& path);

} // namespace srag
