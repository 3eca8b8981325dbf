#include "threadlab/density.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "threadlab/util.hpp"

namespace threadlab {

Density::Density(std::map<std::int64_t, double> mass) : mass_(std::move(mass)) {
  double total = 0;
  for (auto it = mass_.begin(); it != mass_.end();) {
    if (it->second < 0) {
      throw std::invalid_argument("Density: negative mass at d=" +
                                  std::to_string(it->first));
    }
    total += it->second;
    if (it->second == 0) {
      it = mass_.erase(it);
    } else {
      ++it;
    }
  }
  if (mass_.empty()) throw std::invalid_argument("Density: empty support");
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("Density: masses sum to " +
                                fmt_double(total) + ", expected 1");
  }
}

Density Density::from_counts(
    const std::map<std::int64_t, std::int64_t>& counts) {
  std::int64_t total = 0;
  for (const auto& [d, c] : counts) {
    if (c < 0) throw std::invalid_argument("Density: negative count");
    total += c;
  }
  if (total == 0) throw std::invalid_argument("Density: zero total count");
  std::map<std::int64_t, double> mass;
  for (const auto& [d, c] : counts) {
    if (c > 0) mass[d] = static_cast<double>(c) / static_cast<double>(total);
  }
  Density out;
  out.mass_ = std::move(mass);
  return out;
}

Density Density::point_mass(std::int64_t d) {
  Density out;
  out.mass_[d] = 1.0;
  return out;
}

double Density::mass(std::int64_t d) const {
  auto it = mass_.find(d);
  return it == mass_.end() ? 0.0 : it->second;
}

std::int64_t Density::min_support() const {
  if (mass_.empty()) throw std::logic_error("Density: empty");
  return mass_.begin()->first;
}

std::int64_t Density::max_support() const {
  if (mass_.empty()) throw std::logic_error("Density: empty");
  return mass_.rbegin()->first;
}

std::vector<double> Density::dense() const {
  std::int64_t lo = min_support(), hi = max_support();
  std::vector<double> out(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (const auto& [d, m] : mass_) out[static_cast<std::size_t>(d - lo)] = m;
  return out;
}

void Density::to_csv(const std::string& path) const {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "d,mass\n";
  for (const auto& [d, m] : mass_) {
    f << d << ',' << fmt_double(m) << '\n';
  }
  if (!f) throw std::runtime_error("write failed on " + path);
}

double total_variation(const Density& p, const Density& q) {
  std::set<std::int64_t> support;
  for (const auto& [d, m] : p.items()) support.insert(d);
  for (const auto& [d, m] : q.items()) support.insert(d);
  double sum = 0;
  for (std::int64_t d : support) sum += std::abs(p.mass(d) - q.mass(d));
  return 0.5 * sum;
}

}  // namespace threadlab
