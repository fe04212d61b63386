#include "simix/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace simix {

namespace {

constexpr const char* kModule = "cli-io";

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim ascii whitespace
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

bool parse_double(const std::string& cell, double& out) {
  const char* first = cell.data();
  const char* last = first + cell.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last && !cell.empty();
}

}  // namespace

CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io(kModule, "cannot open " + path);

  CsvTable table;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      table.header = split_line(line);
      if (table.header.empty()) throw_io(kModule, path + ": empty header row");
      std::set<std::string> seen;
      for (const auto& name : table.header) {
        if (!seen.insert(name).second) {
          throw_io(kModule, path + ": duplicate header name '" + name + "'");
        }
      }
      continue;
    }
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw_io(kModule, path + ": line " + std::to_string(line_no) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(table.header.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_double(cells[c], row[c])) {
        throw_io(kModule, path + ": line " + std::to_string(line_no) + ", column '" +
                              table.header[c] + "': non-numeric cell '" + cells[c] + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (line_no == 0) throw_io(kModule, path + ": file is empty");
  if (table.rows.empty()) throw_io(kModule, path + ": no data rows");
  return table;
}

Dataset load_csv(const std::string& path, const std::string& response) {
  const CsvTable table = read_csv_table(path);
  const std::size_t n_cols = table.header.size();
  if (n_cols < 2) throw_io(kModule, path + ": need at least one covariate and a response");

  std::size_t y_col = n_cols - 1;
  if (!response.empty()) {
    const auto it = std::find(table.header.begin(), table.header.end(), response);
    if (it != table.header.end()) {
      y_col = static_cast<std::size_t>(it - table.header.begin());
    } else {
      std::size_t idx = 0;
      const char* first = response.data();
      const auto res = std::from_chars(first, first + response.size(), idx);
      if (res.ec != std::errc{} || res.ptr != first + response.size() || idx >= n_cols) {
        throw_io(kModule, "response column '" + response + "' not found");
      }
      y_col = idx;
    }
  }

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(n_cols - 1));
  Eigen::VectorXd y(n);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (c != y_col) names.push_back(table.header[c]);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index xc = 0;
    for (std::size_t c = 0; c < n_cols; ++c) {
      const double v = table.rows[static_cast<std::size_t>(i)][c];
      if (c == y_col) {
        y[i] = v;
      } else {
        x(i, xc++) = v;
      }
    }
  }
  return Dataset(std::move(x), std::move(y), std::move(names));
}

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw_io(kModule, "cannot write " + path);
  for (std::size_t c = 0; c < header.size(); ++c) {
    out << (c ? "," : "") << header[c];
  }
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw_io(kModule, "row width does not match header");
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << format_double(row[c]);
    }
    out << '\n';
  }
  if (!out) throw_io(kModule, "failed writing " + path);
}

void write_kv(const std::string& path,
              const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out(path);
  if (!out) throw_io(kModule, "cannot write " + path);
  for (const auto& [key, value] : entries) {
    out << key << '=' << value << '\n';
  }
  if (!out) throw_io(kModule, "failed writing " + path);
}

std::vector<std::pair<std::string, std::string>> read_kv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io(kModule, "cannot open " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw_io(kModule, path + ": malformed key=value line");
    entries.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return entries;
}

}  // namespace simix
