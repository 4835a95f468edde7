#include "mmddro/csv.hpp"

#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mmddro {

namespace {

std::string trimmed(const std::string& field) {
  const std::size_t begin = field.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const std::size_t end = field.find_last_not_of(" \t\r");
  return field.substr(begin, end - begin + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(trimmed(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw std::invalid_argument(path + ": " + message);
}

double parse_number(const std::string& path, std::size_t row, const std::string& column,
                    const std::string& text) {
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &consumed);
  } catch (const std::exception&) {
    fail(path, "row " + std::to_string(row) + ": field '" + column + "' is not a number: '" +
                   text + "'");
  }
  if (consumed != text.size())
    fail(path, "row " + std::to_string(row) + ": field '" + column + "' is not a number: '" +
                   text + "'");
  return value;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;  // all cells numeric
};

Table read_table(const std::string& path) {
  std::ifstream stream(path);
  if (!stream) fail(path, "cannot open file");
  Table table;
  std::string line;
  std::size_t row_number = 0;
  while (std::getline(stream, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trimmed(line).empty()) continue;  // skip blank lines anywhere
    const std::vector<std::string> fields = split_fields(line);
    if (table.header.empty()) {
      table.header = fields;
      for (const std::string& name : table.header)
        if (name.empty()) fail(path, "header has an empty column name");
      continue;
    }
    if (fields.size() != table.header.size())
      fail(path, "row " + std::to_string(row_number) + ": expected " +
                     std::to_string(table.header.size()) + " fields, got " +
                     std::to_string(fields.size()));
    std::vector<double> values(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i)
      values[i] = parse_number(path, row_number, table.header[i], fields[i]);
    table.rows.push_back(std::move(values));
  }
  if (table.header.empty()) fail(path, "missing header row");
  if (table.rows.empty()) fail(path, "no data rows");
  return table;
}

// Checks that `names` is exactly "x" or "x1".."xd" in order.
void check_point_columns(const std::string& path, const std::vector<std::string>& names) {
  if (names.empty()) fail(path, "no point columns; expected 'x' or 'x1'..'xd'");
  if (names.size() == 1 && (names[0] == "x" || names[0] == "x1")) return;
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string expected = "x" + std::to_string(i + 1);
    if (names[i] != expected)
      fail(path, "point column " + std::to_string(i + 1) + " must be named '" + expected +
                     "', got '" + names[i] + "'");
  }
}

}  // namespace

Eigen::MatrixXd read_points_csv(const std::string& path) {
  const Table table = read_table(path);
  check_point_columns(path, table.header);
  Eigen::MatrixXd points(static_cast<Eigen::Index>(table.rows.size()),
                         static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    for (std::size_t j = 0; j < table.header.size(); ++j)
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = table.rows[i][j];
  return points;
}

LabeledData read_labeled_csv(const std::string& path, const std::string& label_column) {
  const Table table = read_table(path);
  std::size_t label_index = table.header.size();
  for (std::size_t i = 0; i < table.header.size(); ++i)
    if (table.header[i] == label_column) {
      if (label_index != table.header.size())
        fail(path, "duplicate column '" + label_column + "'");
      label_index = i;
    }
  if (label_index == table.header.size())
    fail(path, "missing required column '" + label_column + "'");
  std::vector<std::string> point_names;
  for (std::size_t i = 0; i < table.header.size(); ++i)
    if (i != label_index) point_names.push_back(table.header[i]);
  check_point_columns(path, point_names);

  LabeledData data;
  data.x.resize(static_cast<Eigen::Index>(table.rows.size()),
                static_cast<Eigen::Index>(point_names.size()));
  data.label.resize(static_cast<Eigen::Index>(table.rows.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (j == label_index)
        data.label[static_cast<Eigen::Index>(i)] = table.rows[i][j];
      else
        data.x(static_cast<Eigen::Index>(i), col++) = table.rows[i][j];
    }
  }
  return data;
}

}  // namespace mmddro
