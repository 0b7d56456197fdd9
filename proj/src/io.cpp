#include "recon/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace recon {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string cell;
  while (std::getline(is, cell, sep)) out.push_back(cell);
  return out;
}

}  // namespace

std::string matrix_to_text(const Eigen::MatrixXd& m) {
  std::ostringstream os;
  os << "matrix," << m.rows() << "," << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      os << format_g17(m(i, j)) << (j + 1 == m.cols() ? "\n" : ",");
    }
  }
  return os.str();
}

Eigen::MatrixXd matrix_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("matrix_from_text: empty");
  const auto head = split(trim(line), ',');
  if (head.size() != 3 || head[0] != "matrix") {
    throw std::invalid_argument("matrix_from_text: bad header");
  }
  const Eigen::Index rows = std::stol(head[1]);
  const Eigen::Index cols = std::stol(head[2]);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!std::getline(is, line)) throw std::invalid_argument("matrix_from_text: truncated");
    const auto cells = split(trim(line), ',');
    if (static_cast<Eigen::Index>(cells.size()) != cols) {
      throw std::invalid_argument("matrix_from_text: short row");
    }
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = std::stod(cells[static_cast<size_t>(j)]);
  }
  return m;
}

std::string vector_to_text(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os << "vector," << v.size() << "\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << format_g17(v[i]) << "\n";
  return os.str();
}

Eigen::VectorXd vector_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("vector_from_text: empty");
  const auto head = split(trim(line), ',');
  if (head.size() != 2 || head[0] != "vector") {
    throw std::invalid_argument("vector_from_text: bad header");
  }
  const Eigen::Index n = std::stol(head[1]);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::getline(is, line)) throw std::invalid_argument("vector_from_text: truncated");
    v[i] = std::stod(trim(line));
  }
  return v;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream is(text);
  std::string line;
  long lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

bool KeyValueConfig::has(const std::string& key) const {
  return values_.count(key) != 0;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (!values_.count(key)) order_.push_back(key);
  values_[key] = value;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("config: missing key " + key);
  return it->second;
}

long KeyValueConfig::get_int(const std::string& key) const {
  return std::stol(get_string(key));
}

double KeyValueConfig::get_double(const std::string& key) const {
  return std::stod(get_string(key));
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& cell : split(get_string(key), ',')) {
    const auto t = trim(cell);
    if (!t.empty()) out.push_back(std::stod(t));
  }
  if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
  return out;
}

std::string KeyValueConfig::get_string_or(const std::string& key,
                                          const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

long KeyValueConfig::get_int_or(const std::string& key, long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

double KeyValueConfig::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::string KeyValueConfig::serialize() const {
  std::ostringstream os;
  for (const auto& k : order_) os << k << " = " << values_.at(k) << "\n";
  return os.str();
}

}  // namespace recon
