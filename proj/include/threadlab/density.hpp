#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace threadlab {

// Probability mass function over integers. Masses are non-negative and sum
// to 1 within 1e-9.
class Density {
 public:
  Density() = default;
  explicit Density(std::map<std::int64_t, double> mass);

  static Density from_counts(const std::map<std::int64_t, std::int64_t>& counts);
  static Density point_mass(std::int64_t d);

  double mass(std::int64_t d) const;
  const std::map<std::int64_t, double>& items() const { return mass_; }
  bool empty() const { return mass_.empty(); }
  std::int64_t min_support() const;
  std::int64_t max_support() const;

  // Masses on the contiguous range [min_support, max_support], zero-filled.
  std::vector<double> dense() const;

  void to_csv(const std::string& path) const;  // two columns: d, mass

  bool operator==(const Density&) const = default;

 private:
  std::map<std::int64_t, double> mass_;
};

// Total variation distance, 0.5 * sum |p - q| over the union support.
double total_variation(const Density& p, const Density& q);

}  // namespace threadlab
