#include "recon/sinc_table.hpp"

#include <gsl/gsl_sf_expint.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "recon/io.hpp"

namespace recon {

double psi(double t) { return gsl_sf_Si(M_PI * t) / M_PI; }

double f_closed(double t) {
  return t * psi(t) - (1.0 - std::cos(M_PI * t)) / (M_PI * M_PI);
}

LookupTable::LookupTable(double t_max, double step) : step_(step) {
  if (!(t_max > 0) || !(step > 0)) {
    throw std::invalid_argument("LookupTable: t_max and step must be positive");
  }
  if (step > 1.0 / 64 + 1e-15) {
    throw std::invalid_argument("LookupTable: step must be <= 1/64");
  }
  const long n = static_cast<long>(std::ceil(t_max / step)) + 1;
  values_.resize(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) values_[static_cast<size_t>(i)] = f_closed(i * step);
  t_max_ = (n - 1) * step;
}

double LookupTable::node(long i) const {
  if (i < 0) i = -i;  // f is even
  return values_[static_cast<size_t>(i)];
}

double LookupTable::f_eval(double t) const {
  const double a = std::abs(t);
  if (a > t_max_ + 1e-12) {
    throw std::out_of_range("LookupTable::f_eval: argument beyond t_max");
  }
  ++lookups_;
  const double x = std::min(a, t_max_) / step_;
  long i = static_cast<long>(std::floor(x));
  const long last = static_cast<long>(values_.size()) - 1;
  if (i > last - 2) i = last - 2;  // keep the 4-point stencil in range
  const double u = x - i;
  // uniform 4-point Lagrange cubic through nodes i-1 .. i+2
  const double y0 = node(i - 1), y1 = node(i), y2 = node(i + 1), y3 = node(i + 2);
  return -y0 * u * (u - 1.0) * (u - 2.0) / 6.0 +
         y1 * (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0 -
         y2 * (u + 1.0) * u * (u - 2.0) / 2.0 +
         y3 * (u + 1.0) * u * (u - 1.0) / 6.0;
}

double gram_entry_f(double t_ij, double t_ij_prev, double t_ipjp,
                    double t_ipjp_prev, const LookupTable& table) {
  const double d1 = t_ij - t_ipjp_prev;
  const double d2 = t_ij_prev - t_ipjp_prev;
  const double d3 = t_ij - t_ipjp;
  const double d4 = t_ij_prev - t_ipjp;
  return table.f_eval(d1) - table.f_eval(d2) - table.f_eval(d3) + table.f_eval(d4);
}

std::string ftable_to_text(const LookupTable& table) {
  std::ostringstream os;
  os << "ftable," << format_g17(table.t_max()) << "," << format_g17(table.step())
     << "," << table.size() << "\n";
  for (double v : table.values()) os << format_g17(v) << "\n";
  return os.str();
}

LookupTable ftable_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("ftable_from_text: empty");
  std::istringstream hs(line);
  std::string tag, tmax, step, count;
  std::getline(hs, tag, ',');
  std::getline(hs, tmax, ',');
  std::getline(hs, step, ',');
  std::getline(hs, count, ',');
  if (tag != "ftable") throw std::invalid_argument("ftable_from_text: bad header");
  LookupTable table(std::stod(tmax), std::stod(step));
  if (table.size() != static_cast<size_t>(std::stoul(count))) {
    throw std::invalid_argument("ftable_from_text: size mismatch");
  }
  // values are rebuilt from the closed form; verify the stored ones agree
  size_t i = 0;
  while (std::getline(is, line) && i < table.size()) {
    if (std::abs(std::stod(line) - table.values()[i]) > 1e-12) {
      throw std::invalid_argument("ftable_from_text: value mismatch at row " +
                                  std::to_string(i));
    }
    ++i;
  }
  if (i != table.size()) throw std::invalid_argument("ftable_from_text: truncated");
  return table;
}

}  // namespace recon
