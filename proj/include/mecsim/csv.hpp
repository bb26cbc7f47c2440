#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mecsim {

/// Loaded CSV with a mandatory header row. Cells are kept as raw strings;
/// callers convert with the parse_* helpers so error messages can carry the
/// row number.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(std::string_view name) const;  // -1 when absent
    int require_column(std::string_view name, std::string_view file) const;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(std::string_view content, std::string_view origin);

/// Requires the header to be exactly `expected` (order included).
void require_header(const CsvTable& t, const std::vector<std::string>& expected, std::string_view file);

class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header);
    void row(const std::vector<std::string>& cells);
    const std::string& str() const { return buf_; }
    void write_file(const std::string& path) const;

  private:
    std::size_t n_cols_;
    std::string buf_;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace mecsim
