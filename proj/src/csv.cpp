#include "biochain/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace biochain::io {

namespace {

const char* kind_word(IngestErrorKind k) {
    switch (k) {
        case IngestErrorKind::Io: return "io error";
        case IngestErrorKind::Parse: return "parse error";
        case IngestErrorKind::Schema: return "schema error";
        case IngestErrorKind::Validation: return "validation error";
    }
    return "error";
}

std::string compose(IngestErrorKind kind, const std::string& file, int line,
                    const std::string& message) {
    std::ostringstream os;
    os << kind_word(kind) << ": " << file;
    if (line > 0) os << ":" << line;
    os << ": " << message;
    return os.str();
}

}  // namespace

IngestError::IngestError(IngestErrorKind kind, std::string file, int line,
                         const std::string& message)
    : std::runtime_error(compose(kind, file, line, message)),
      kind_(kind),
      file_(std::move(file)),
      line_(line) {}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

int CsvTable::require_column(const std::string& name) const {
    int c = column(name);
    if (c < 0) throw IngestError(IngestErrorKind::Schema, path, 1, "missing required column '" + name + "'");
    return c;
}

const std::string& CsvTable::cell(std::size_t row, int col) const {
    static const std::string empty;
    if (col < 0 || static_cast<std::size_t>(col) >= rows[row].size()) return empty;
    return rows[row][col];
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IngestError(IngestErrorKind::Io, path.string(), 0, "cannot open file for reading");
    CsvTable table;
    table.path = path.string();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split_line(line);
        if (lineno == 1 || table.header.empty()) {
            table.header = std::move(cells);
        } else {
            if (cells.size() > table.header.size())
                throw IngestError(IngestErrorKind::Parse, table.path, lineno,
                                  "row has more cells than the header");
            table.rows.push_back(std::move(cells));
            table.line_numbers.push_back(lineno);
        }
    }
    if (table.header.empty())
        throw IngestError(IngestErrorKind::Parse, table.path, 1, "file has no header row");
    return table;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw IngestError(IngestErrorKind::Io, path.string(), 0, "cannot open file for writing");
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    };
    emit(header);
    for (const auto& row : rows) emit(row);
    if (!out) throw IngestError(IngestErrorKind::Io, path.string(), 0, "write failed");
}

std::vector<std::string> split_list(const std::string& cell) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : cell) {
        if (ch == ';') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string join_list(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out.push_back(';');
        out += items[i];
    }
    return out;
}

double parse_double(const std::string& cell, const std::string& file, int line) {
    double v = 0.0;
    const char* b = cell.data();
    const char* e = b + cell.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e)
        throw IngestError(IngestErrorKind::Parse, file, line, "invalid number '" + cell + "'");
    return v;
}

long parse_int(const std::string& cell, const std::string& file, int line) {
    long v = 0;
    const char* b = cell.data();
    const char* e = b + cell.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e)
        throw IngestError(IngestErrorKind::Parse, file, line, "invalid integer '" + cell + "'");
    return v;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace biochain::io
