#pragma once

#include <string>
#include <utility>
#include <vector>

#include "simix/dataset.hpp"

namespace simix {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// Strict numeric CSV reader: header row required, every cell must parse as a
// decimal number, offending cells are reported with their line number.
CsvTable read_csv_table(const std::string& path);

// Loads a dataset, designating one column as the response. `response` may be
// a column name or a 0-based column index; empty selects the last column.
Dataset load_csv(const std::string& path, const std::string& response = "");

// Shortest round-trip formatting, so a written table re-parses to the exact
// same doubles.
std::string format_double(double v);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Ordered key=value summary file.
void write_kv(const std::string& path,
              const std::vector<std::pair<std::string, std::string>>& entries);

std::vector<std::pair<std::string, std::string>> read_kv(const std::string& path);

}  // namespace simix
