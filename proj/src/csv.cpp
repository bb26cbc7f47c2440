#include "mecsim/csv.hpp"

#include <fstream>
#include <sstream>

#include "mecsim/error.hpp"
#include "mecsim/text.hpp"

namespace mecsim {

int CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

int CsvTable::require_column(std::string_view name, std::string_view file) const {
    const int c = column(name);
    if (c < 0)
        fail(Errc::Validation, std::string(file) + ": missing required column '" + std::string(name) + "'");
    return c;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::Io, "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) fail(Errc::Io, "read failed: " + path);
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::Io, "cannot open file for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(Errc::Io, "write failed: " + path);
}

CsvTable parse_csv(std::string_view content, std::string_view origin) {
    CsvTable t;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= content.size()) {
        if (pos == content.size()) break;
        auto nl = content.find('\n', pos);
        std::string_view line = (nl == std::string_view::npos) ? content.substr(pos)
                                                               : content.substr(pos, nl - pos);
        pos = (nl == std::string_view::npos) ? content.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty()) continue;
        auto cells = split(line, ',');
        for (auto& c : cells) c = std::string(trim(c));
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            fail(Errc::Validation, std::string(origin) + ":" + format_int(static_cast<std::int64_t>(line_no)) +
                                       ": expected " + format_int(static_cast<std::int64_t>(t.header.size())) +
                                       " cells, got " + format_int(static_cast<std::int64_t>(cells.size())));
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty()) fail(Errc::Validation, std::string(origin) + ": empty file, expected a header row");
    return t;
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_text_file(path), path); }

void require_header(const CsvTable& t, const std::vector<std::string>& expected, std::string_view file) {
    bool ok = t.header.size() == expected.size();
    for (std::size_t i = 0; ok && i < expected.size(); ++i) ok = t.header[i] == expected[i];
    if (!ok) {
        std::string want, got;
        for (std::size_t i = 0; i < expected.size(); ++i) want += (i ? "," : "") + expected[i];
        for (std::size_t i = 0; i < t.header.size(); ++i) got += (i ? "," : "") + t.header[i];
        fail(Errc::Validation, std::string(file) + ": header mismatch, expected '" + want + "', got '" + got + "'");
    }
}

CsvWriter::CsvWriter(std::vector<std::string> header) : n_cols_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += header[i];
    }
    buf_ += '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != n_cols_)
        fail(Errc::InvalidArgument, "csv row width " + format_int(static_cast<std::int64_t>(cells.size())) +
                                        " does not match header width " + format_int(static_cast<std::int64_t>(n_cols_)));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += cells[i];
    }
    buf_ += '\n';
}

void CsvWriter::write_file(const std::string& path) const { write_text_file(path, buf_); }

}  // namespace mecsim
