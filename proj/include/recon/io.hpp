#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace recon {

/// 17-significant-digit decimal, round-trips a double exactly.
std::string format_g17(double v);

/// Portable text matrix: header "matrix,rows,cols", then comma-separated rows.
std::string matrix_to_text(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_text(const std::string& text);

/// Portable text vector: header "vector,n", then one value per line.
std::string vector_to_text(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_text(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

/// Flat key=value configuration. Lines are "key = value"; '#' starts a
/// comment; insertion order is preserved for the round-trip echo.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key) const;
  long get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  long get_int_or(const std::string& key, long fallback) const;
  double get_double_or(const std::string& key, double fallback) const;

  std::string serialize() const;
  const std::vector<std::string>& keys() const { return order_; }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

}  // namespace recon
