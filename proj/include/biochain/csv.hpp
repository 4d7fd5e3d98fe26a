#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace biochain::io {

enum class IngestErrorKind { Io, Parse, Schema, Validation };

class IngestError : public std::runtime_error {
  public:
    IngestError(IngestErrorKind kind, std::string file, int line, const std::string& message);

    IngestErrorKind kind() const { return kind_; }
    const std::string& file() const { return file_; }
    int line() const { return line_; }  // 1-based, 0 when not row-specific

  private:
    IngestErrorKind kind_;
    std::string file_;
    int line_;
};

// A parsed CSV file: one header row plus data rows. Cells are raw strings;
// empty cells mean "absent". The dialect is plain comma separation without
// quoting; list-valued cells use ';' between elements.
struct CsvTable {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> line_numbers;  // 1-based source line per data row

    int column(const std::string& name) const;           // -1 when missing
    int require_column(const std::string& name) const;   // throws SchemaError
    const std::string& cell(std::size_t row, int col) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::vector<std::string> split_list(const std::string& cell);  // ';'-separated
std::string join_list(const std::vector<std::string>& items);

// Numeric cells round-trip exactly: parse with from_chars, print the shortest
// decimal that recovers the same double.
double parse_double(const std::string& cell, const std::string& file, int line);
long parse_int(const std::string& cell, const std::string& file, int line);
std::string format_double(double v);

}  // namespace biochain::io
