#include "gvcplm/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gvcplm {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Splits one CSV record honoring double-quote escaping.
std::vector<std::string> split_csv_line(const std::string& line, int line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c == '\r') {
      // tolerate CRLF
    } else {
      cur += c;
    }
  }
  if (in_quotes)
    throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                ": unterminated quote");
  fields.push_back(cur);
  return fields;
}

}  // namespace

void Dataset::validate() {
  const Eigen::Index rows = u.size();
  if (rows < 1) throw std::invalid_argument("dataset: needs n >= 1 rows");
  if (x.rows() != rows || z.rows() != rows || y.size() != rows)
    throw std::invalid_argument("dataset: row counts differ across u, x, z, y");
  if (x.cols() < 1) throw std::invalid_argument("dataset: needs p >= 1");
  auto all_finite = [](const Eigen::MatrixXd& m) {
    return m.allFinite();
  };
  if (!u.allFinite() || !y.allFinite() || !all_finite(x) || !all_finite(z))
    throw std::invalid_argument("dataset: non-finite entries");
  if (x_names.empty())
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      x_names.push_back("x" + std::to_string(j + 1));
  if (z_names.empty())
    for (Eigen::Index j = 0; j < z.cols(); ++j)
      z_names.push_back("z" + std::to_string(j + 1));
  if (static_cast<Eigen::Index>(x_names.size()) != x.cols() ||
      static_cast<Eigen::Index>(z_names.size()) != z.cols())
    throw std::invalid_argument("dataset: column name counts differ");
}

Dataset Dataset::with_z_columns(const std::vector<int>& keep) const {
  Dataset out;
  out.u = u;
  out.x = x;
  out.y = y;
  out.x_names = x_names;
  out.z.resize(u.size(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.z.col(static_cast<Eigen::Index>(k)) = z.col(keep[k]);
    out.z_names.push_back(z_names[static_cast<std::size_t>(keep[k])]);
  }
  return out;
}

Dataset Dataset::with_x_columns(const std::vector<int>& keep) const {
  Dataset out;
  out.u = u;
  out.z = z;
  out.y = y;
  out.z_names = z_names;
  out.x.resize(u.size(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.x.col(static_cast<Eigen::Index>(k)) = x.col(keep[k]);
    out.x_names.push_back(x_names[static_cast<std::size_t>(keep[k])]);
  }
  return out;
}

Dataset Dataset::rows(const std::vector<int>& keep) const {
  Dataset out;
  const Eigen::Index m = static_cast<Eigen::Index>(keep.size());
  out.u.resize(m);
  out.y.resize(m);
  out.x.resize(m, x.cols());
  out.z.resize(m, z.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    out.u(i) = u(keep[static_cast<std::size_t>(i)]);
    out.y(i) = y(keep[static_cast<std::size_t>(i)]);
    out.x.row(i) = x.row(keep[static_cast<std::size_t>(i)]);
    out.z.row(i) = z.row(keep[static_cast<std::size_t>(i)]);
  }
  out.x_names = x_names;
  out.z_names = z_names;
  return out;
}

ColumnRoles ColumnRoles::parse(const std::string& text,
                               std::vector<std::string>* errors) {
  ColumnRoles roles;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      if (errors)
        errors->push_back("roles line " + std::to_string(line_no) +
                          ": expected `column = role`");
      continue;
    }
    std::string col = trim(t.substr(0, eq));
    std::string role = trim(t.substr(eq + 1));
    std::transform(role.begin(), role.end(), role.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (role != "u" && role != "x" && role != "z" && role != "y" &&
        role != "ignore") {
      if (errors)
        errors->push_back("roles line " + std::to_string(line_no) +
                          ": role must be one of u, x, z, y, ignore");
      continue;
    }
    roles.entries.emplace_back(col, role);
  }
  return roles;
}

ColumnRoles ColumnRoles::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open roles file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::vector<std::string> errors;
  ColumnRoles roles = parse(buf.str(), &errors);
  if (!errors.empty()) {
    std::string msg = "roles file " + path + ":";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  return roles;
}

Dataset load_csv(const std::string& csv_path, const ColumnRoles& roles) {
  std::ifstream in(csv_path);
  if (!in) throw std::invalid_argument("cannot open csv file: " + csv_path);

  std::string header;
  if (!std::getline(in, header))
    throw std::invalid_argument("csv file is empty (header row required)");
  const auto columns = split_csv_line(header, 1);

  std::vector<std::string> errors;
  std::vector<std::string> role_of(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const std::string name = trim(columns[c]);
    auto it = std::find_if(roles.entries.begin(), roles.entries.end(),
                           [&](const auto& e) { return e.first == name; });
    if (it == roles.entries.end()) {
      errors.push_back("column `" + name + "` has no role assignment");
      role_of[c] = "ignore";
    } else {
      role_of[c] = it->second;
    }
  }
  for (const auto& e : roles.entries)
    if (std::find_if(columns.begin(), columns.end(), [&](const std::string& c) {
          return trim(c) == e.first;
        }) == columns.end())
      errors.push_back("roles file names column `" + e.first +
                       "` absent from the csv header");
  const auto count_role = [&](const std::string& r) {
    return std::count(role_of.begin(), role_of.end(), r);
  };
  if (count_role("u") != 1)
    errors.push_back("exactly one column must have role u (found " +
                     std::to_string(count_role("u")) + ")");
  if (count_role("y") != 1)
    errors.push_back("exactly one column must have role y (found " +
                     std::to_string(count_role("y")) + ")");

  std::vector<double> u_vals, y_vals;
  std::vector<std::vector<double>> x_cols, z_cols;
  std::vector<std::string> x_names, z_names;
  std::vector<std::size_t> x_idx, z_idx;
  std::size_t u_idx = 0, y_idx = 0;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (role_of[c] == "u") u_idx = c;
    if (role_of[c] == "y") y_idx = c;
    if (role_of[c] == "x") {
      x_idx.push_back(c);
      x_names.push_back(trim(columns[c]));
    }
    if (role_of[c] == "z") {
      z_idx.push_back(c);
      z_names.push_back(trim(columns[c]));
    }
  }
  if (x_idx.empty()) errors.push_back("at least one column must have role x");
  if (!errors.empty()) {
    std::string msg = "csv/roles validation failed:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }

  x_cols.resize(x_idx.size());
  z_cols.resize(z_idx.size());
  std::string line;
  int line_no = 1;
  auto parse_field = [&](const std::string& field, int ln) {
    const std::string t = trim(field);
    if (t.empty() || t == "NA" || t == "nan" || t == "NaN")
      throw std::invalid_argument("csv line " + std::to_string(ln) +
                                  ": missing value (no imputation)");
    std::size_t pos = 0;
    double v = std::stod(t, &pos);
    if (pos != t.size() || !std::isfinite(v))
      throw std::invalid_argument("csv line " + std::to_string(ln) +
                                  ": non-numeric field `" + t + "`");
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line, line_no);
    if (fields.size() != columns.size())
      throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                  ": expected " +
                                  std::to_string(columns.size()) + " fields");
    u_vals.push_back(parse_field(fields[u_idx], line_no));
    y_vals.push_back(parse_field(fields[y_idx], line_no));
    for (std::size_t k = 0; k < x_idx.size(); ++k)
      x_cols[k].push_back(parse_field(fields[x_idx[k]], line_no));
    for (std::size_t k = 0; k < z_idx.size(); ++k)
      z_cols[k].push_back(parse_field(fields[z_idx[k]], line_no));
  }

  Dataset data;
  const Eigen::Index n = static_cast<Eigen::Index>(u_vals.size());
  data.u = Eigen::Map<Eigen::VectorXd>(u_vals.data(), n);
  data.y = Eigen::Map<Eigen::VectorXd>(y_vals.data(), n);
  data.x.resize(n, static_cast<Eigen::Index>(x_cols.size()));
  for (std::size_t k = 0; k < x_cols.size(); ++k)
    data.x.col(static_cast<Eigen::Index>(k)) =
        Eigen::Map<Eigen::VectorXd>(x_cols[k].data(), n);
  data.z.resize(n, static_cast<Eigen::Index>(z_cols.size()));
  for (std::size_t k = 0; k < z_cols.size(); ++k)
    data.z.col(static_cast<Eigen::Index>(k)) =
        Eigen::Map<Eigen::VectorXd>(z_cols[k].data(), n);
  data.x_names = x_names;
  data.z_names = z_names;
  data.validate();
  return data;
}

}  // namespace gvcplm
