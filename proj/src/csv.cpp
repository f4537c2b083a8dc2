#include "srag/csv.hpp"

#include "srag/errors.hpp"
#include "srag/util.hpp"

#include <sstream>

namespace srag {
namespace {

bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\n\r") != std::string::npos;
}

std::string escape(const std::string& field) {
    if (!needs_quoting(field))
        return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += "\"\"";
        else
            out += c;
    }
    out += "\"";
    return out;
}

CsvRow parse_line(std::string_view line, const std::filesystem::path& path,
                  std::size_t line_no) {
    CsvRow row;
    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    while (i <= line.size()) {
        if (i == line.size()) {
            if (quoted)
                throw IoError("csv " + path.string() + " line " + std::to_string(line_no) +
                              ": unterminated quote");
            row.push_back(std::move(field));
            break;
        }
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    i += 2;
                    continue;
                }
                quoted = false;
                ++i;
                continue;
            }
            field.push_back(c);
            ++i;
            continue;
        }
        if (c == '"' && field.empty()) {
            quoted = true;
            ++i;
            continue;
        }
        if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            ++i;
            continue;
        }
        field.push_back(c);
        ++i;
    }
    return row;
}

} // namespace

std::string to_csv_line(const CsvRow& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i > 0)
            out += ",";
        out += escape(row[i]);
    }
    return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::string out = to_csv_line(table.header);
    out += "\n";
    for (const CsvRow& row : table.rows) {
        if (row.size() != table.header.size())
            throw InvalidArgument("write_csv: row width " + std::to_string(row.size()) +
                                  " does not match header width " +
                                  std::to_string(table.header.size()));
        out += to_csv_line(row);
        out += "\n";
    }
    write_text_file(path, out);
}

CsvTable read_csv(const std::filesystem::path& path) {
    const std::string content = read_text_file(path);
    CsvTable table;
    std::size_t start = 0;
    std::size_t line_no = 0;
    while (start < content.size()) {
        std::size_t nl = content.find('\n', start);
        if (nl == std::string::npos)
            nl = content.size();
        const std::string_view line(content.data() + start, nl - start);
        ++line_no;
        CsvRow row = parse_line(line, path, line_no);
        if (line_no == 1)
            table.header = std::move(row);
        else
            table.rows.push_back(std::move(row));
        start = nl + 1;
    }
    if (table.header.empty())
        throw IoError("csv " + path.string() + ": missing header row");
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        if (table.rows[i].size() != table.header.size())
            throw IoError("csv " + path.string() + " row " + std::to_string(i + 1) +
                          ": width mismatch");
    return table;
}

} // namespace srag
