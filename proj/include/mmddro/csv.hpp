#pragma once
// Headered CSV readers for command-line inputs. Point columns are either a
// single "x" or "x1".."xd" in order; labeled files add one named value column.
// Parse failures throw std::invalid_argument naming the file, row, and field.

#include <string>

#include <Eigen/Dense>

namespace mmddro {

struct LabeledData {
  Eigen::MatrixXd x;
  Eigen::VectorXd label;
};

// File of points only: header "x" or "x1,...,xd", one point per row.
Eigen::MatrixXd read_points_csv(const std::string& path);

// File of points plus one value column named label_column (any position).
LabeledData read_labeled_csv(const std::string& path, const std::string& label_column);

}  // namespace mmddro
