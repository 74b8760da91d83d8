#pragma once

#include <string>
#include <vector>

// Bit-stable output: CSV numbers are written with 17 significant digits,
// '.' decimal separator and '\n' line endings, so files are identical across
// runs given identical floating-point results.

namespace bistab {

/// %.17g rendering of a double ("nan" for NaN).
std::string fmt_g17(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }
    std::string to_string() const;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace bistab
