#pragma once

// Minimal RFC 4180 CSV: fields with commas, quotes or newlines are quoted.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace chipnet::csv {

std::string escape(const std::string& field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index, or -1.
    int column(const std::string& name) const;
};

// Throws std::runtime_error on unterminated quotes or ragged rows.
Table read(std::istream& in);
Table read_file(const std::string& path);

}  // namespace chipnet::csv
