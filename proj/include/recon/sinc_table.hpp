#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace recon {

/// psi(t) = integral of sinc over [0, t] = Si(pi t) / pi. Odd, -> 1/2.
double psi(double t);

/// Closed form of the second sinc antiderivative
/// f(t) = t psi(t) - (1 - cos(pi t)) / pi^2, with f'' = sinc. Even in t.
double f_closed(double t);

/// Uniform table of f on [0, t_max] with cubic (4-point) interpolation.
/// Negative arguments use the even symmetry of f. Immutable after build;
/// the lookup counter backs an operation-count micro-test.
class LookupTable {
 public:
  LookupTable(double t_max, double step = 1.0 / 64);

  double t_max() const { return t_max_; }
  double step() const { return step_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

  /// f at t via interpolation; throws std::out_of_range for |t| > t_max.
  double f_eval(double t) const;

  std::size_t lookup_count() const { return lookups_; }
  void reset_lookup_count() const { lookups_ = 0; }

 private:
  double t_max_ = 0;
  double step_ = 0;
  std::vector<double> values_;
  mutable std::size_t lookups_ = 0;

  double node(long i) const;  // even-reflected table access
};

/// Gram entry <h~_{i'j'}, h_{ij}> of two aperiodic-sinc indicator kernels
/// from 4 table lookups and 7 additions/subtractions.
double gram_entry_f(double t_ij, double t_ij_prev, double t_ipjp,
                    double t_ipjp_prev, const LookupTable& table);

/// Text form: header "ftable,t_max,step,n", then one value per line.
std::string ftable_to_text(const LookupTable& table);
LookupTable ftable_from_text(const std::string& text);

}  // namespace recon
