#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace gvcplm {

// Observations (U_i, X_i, Z_i, Y_i). U is the single smoothing index with
// support [omega_lo, omega_hi]; X are the varying-coefficient covariates
// (column 1 may be a constant 1 for an intercept function); Z the parametric
// covariates (d = 0 means a purely varying-coefficient model).
struct Dataset {
  Eigen::VectorXd u;
  Eigen::MatrixXd x;
  Eigen::MatrixXd z;
  Eigen::VectorXd y;
  std::vector<std::string> x_names;
  std::vector<std::string> z_names;

  Eigen::Index n() const { return u.size(); }
  Eigen::Index p() const { return x.cols(); }
  Eigen::Index d() const { return z.cols(); }
  double omega_lo() const { return u.minCoeff(); }
  double omega_hi() const { return u.maxCoeff(); }
  double omega_length() const { return omega_hi() - omega_lo(); }

  // Checks row counts, finiteness, n >= 1 and p >= 1; fills default names.
  void validate();

  // Copy with a subset of Z columns (used by subset selection and GLRT
  // nulls that drop X columns use with_x_columns).
  Dataset with_z_columns(const std::vector<int>& keep) const;
  Dataset with_x_columns(const std::vector<int>& keep) const;
  Dataset rows(const std::vector<int>& keep) const;
};

// Sidecar role map: one `column = role` line per CSV column with role in
// {u, x, z, y, ignore}; exactly one u and one y column.
struct ColumnRoles {
  std::vector<std::pair<std::string, std::string>> entries;
  static ColumnRoles read(const std::string& path);
  static ColumnRoles parse(const std::string& text,
                           std::vector<std::string>* errors = nullptr);
};

// Strict CSV ingestion: header row required, RFC-style quoting, missing
// values rejected. Collects all problems into a std::invalid_argument.
Dataset load_csv(const std::string& csv_path, const ColumnRoles& roles);

}  // namespace gvcplm
