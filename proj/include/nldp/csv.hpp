#pragma once

#include <string>
#include <vector>

namespace nldp {

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string render() const;
};

/// Writes through a temporary file and renames, so readers never see a partial table.
void write_text_file(const std::string& path, const std::string& content);
void write_csv(const std::string& path, const CsvTable& table);

}  // namespace nldp
