#include "envlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace envlab {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

TorusGrid::TorusGrid(double length, std::size_t n) : length_(length), n_(n) {
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw std::invalid_argument("TorusGrid: length must be positive and finite");
  }
  if (!is_power_of_two(n) || n < 16) {
    throw std::invalid_argument("TorusGrid: n must be a power of two >= 16, got " +
                                std::to_string(n));
  }
  const double p = length / (2.0 * std::numbers::pi);
  const double rounded = std::round(p);
  if (rounded < 1.0 || std::abs(p - rounded) > 1e-9 * rounded) {
    throw std::invalid_argument("TorusGrid: length must be 2*pi times a positive integer");
  }
  periods_ = rounded;
  length_ = 2.0 * std::numbers::pi * rounded;
}

TorusGrid TorusGrid::with_periods(double periods, std::size_t n) {
  return TorusGrid(2.0 * std::numbers::pi * periods, n);
}

std::size_t TorusGrid::index_of(long j) const noexcept {
  const auto n = static_cast<long>(n_);
  long r = j % n;
  if (r < 0) r += n;
  return static_cast<std::size_t>(r);
}

std::optional<long> TorusGrid::lattice_index(double xi) const noexcept {
  const double j = xi * periods_;
  const double rounded = std::round(j);
  if (std::abs(j - rounded) > 1e-9 * std::max(1.0, std::abs(rounded))) return std::nullopt;
  return static_cast<long>(rounded);
}

}  // namespace envlab
