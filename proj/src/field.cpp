#include "envlab/field.hpp"

#include <mutex>
#include <stdexcept>
#include <string>

#include "fft.hpp"

namespace envlab {

struct Field::Impl {
  TorusGrid grid;
  bool real;
  bool has_values;
  mutable ComplexVector values;
  mutable ComplexVector spectrum;
  mutable std::once_flag derived;

  Impl(const TorusGrid& g, bool is_real, bool from_values, ComplexVector data)
      : grid(g), real(is_real), has_values(from_values) {
    if (from_values) {
      values = std::move(data);
    } else {
      spectrum = std::move(data);
    }
  }

  void materialize() const {
    std::call_once(derived, [this] {
      if (has_values) {
        spectrum.resize(values.size());
        fft::forward(values, spectrum);
      } else {
        values.resize(spectrum.size());
        fft::backward(spectrum, values);
        if (real) {
          for (auto& v : values) v = cplx(v.real(), 0.0);
        }
      }
    });
  }
};

namespace {

void require_size(const TorusGrid& grid, std::size_t size, const char* where) {
  if (size != grid.size()) {
    throw std::invalid_argument(std::string(where) + ": expected " +
                                std::to_string(grid.size()) + " samples, got " +
                                std::to_string(size));
  }
}

}  // namespace

Field Field::from_values(const TorusGrid& grid, std::span<const cplx> values) {
  require_size(grid, values.size(), "Field::from_values");
  ComplexVector data(values.begin(), values.end());
  return Field(std::make_shared<const Impl>(grid, false, true, std::move(data)));
}

Field Field::from_real_values(const TorusGrid& grid, std::span<const double> values) {
  require_size(grid, values.size(), "Field::from_real_values");
  ComplexVector data(values.size());
  for (std::size_t m = 0; m < values.size(); ++m) data[m] = cplx(values[m], 0.0);
  return Field(std::make_shared<const Impl>(grid, true, true, std::move(data)));
}

Field Field::from_spectrum(const TorusGrid& grid, std::span<const cplx> spectrum) {
  require_size(grid, spectrum.size(), "Field::from_spectrum");
  ComplexVector data(spectrum.begin(), spectrum.end());
  return Field(std::make_shared<const Impl>(grid, false, false, std::move(data)));
}

Field Field::from_real_spectrum(const TorusGrid& grid, std::span<const cplx> spectrum) {
  require_size(grid, spectrum.size(), "Field::from_real_spectrum");
  const std::size_t n = grid.size();
  ComplexVector data(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t mirror = (n - i) % n;
    data[i] = 0.5 * (spectrum[i] + std::conj(spectrum[mirror]));
  }
  return Field(std::make_shared<const Impl>(grid, true, false, std::move(data)));
}

Field Field::adopt_values(const TorusGrid& grid, ComplexVector values, bool real) {
  require_size(grid, values.size(), "Field::adopt_values");
  if (real) {
    for (auto& v : values) v = cplx(v.real(), 0.0);
  }
  return Field(std::make_shared<const Impl>(grid, real, true, std::move(values)));
}

Field Field::adopt_spectrum(const TorusGrid& grid, ComplexVector spectrum, bool real) {
  require_size(grid, spectrum.size(), "Field::adopt_spectrum");
  return Field(std::make_shared<const Impl>(grid, real, false, std::move(spectrum)));
}

Field Field::zeros(const TorusGrid& grid, bool real) {
  ComplexVector data(grid.size(), cplx(0.0, 0.0));
  return Field(std::make_shared<const Impl>(grid, real, false, std::move(data)));
}

Field Field::sample(const TorusGrid& grid, const std::function<cplx(double)>& fn) {
  ComplexVector data(grid.size());
  for (std::size_t m = 0; m < grid.size(); ++m) data[m] = fn(grid.node(m));
  return Field(std::make_shared<const Impl>(grid, false, true, std::move(data)));
}

Field Field::sample_real(const TorusGrid& grid, const std::function<double(double)>& fn) {
  ComplexVector data(grid.size());
  for (std::size_t m = 0; m < grid.size(); ++m) data[m] = cplx(fn(grid.node(m)), 0.0);
  return Field(std::make_shared<const Impl>(grid, true, true, std::move(data)));
}

Field Field::mode(const TorusGrid& grid, long j, cplx amplitude) {
  const auto half = static_cast<long>(grid.size() / 2);
  if (j < -half || j >= half) {
    throw std::invalid_argument("Field::mode: wavenumber " + std::to_string(j) +
                                " is not retained by the grid");
  }
  ComplexVector data(grid.size(), cplx(0.0, 0.0));
  data[grid.index_of(j)] = amplitude;
  return Field(std::make_shared<const Impl>(grid, false, false, std::move(data)));
}

const TorusGrid& Field::grid() const noexcept { return impl_->grid; }

bool Field::is_real() const noexcept { return impl_->real; }

std::span<const cplx> Field::values() const {
  if (!impl_->has_values) impl_->materialize();
  return impl_->values;
}

std::span<const cplx> Field::spectrum() const {
  if (impl_->has_values) impl_->materialize();
  return impl_->spectrum;
}

Field Field::real_part() const {
  const auto v = values();
  ComplexVector data(v.size());
  for (std::size_t m = 0; m < v.size(); ++m) data[m] = cplx(v[m].real(), 0.0);
  return Field(std::make_shared<const Impl>(grid(), true, true, std::move(data)));
}

Field Field::imag_part() const {
  const auto v = values();
  ComplexVector data(v.size());
  for (std::size_t m = 0; m < v.size(); ++m) data[m] = cplx(v[m].imag(), 0.0);
  return Field(std::make_shared<const Impl>(grid(), true, true, std::move(data)));
}

Field Field::conj() const {
  if (is_real()) return *this;
  if (impl_->has_values) {
    const auto v = values();
    ComplexVector data(v.size());
    for (std::size_t m = 0; m < v.size(); ++m) data[m] = std::conj(v[m]);
    return Field(std::make_shared<const Impl>(grid(), false, true, std::move(data)));
  }
  const auto s = spectrum();
  const std::size_t n = s.size();
  ComplexVector data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = std::conj(s[(n - i) % n]);
  return Field(std::make_shared<const Impl>(grid(), false, false, std::move(data)));
}

namespace {

template <class Op>
ComplexVector combine(std::span<const cplx> a, std::span<const cplx> b, Op op) {
  ComplexVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i], b[i]);
  return out;
}

}  // namespace

Field Field::operator+(const Field& other) const {
  require_same_grid(*this, other, "Field::operator+");
  auto data = combine(spectrum(), other.spectrum(), std::plus<cplx>{});
  return Field(std::make_shared<const Impl>(grid(), is_real() && other.is_real(), false,
                                            std::move(data)));
}

Field Field::operator-(const Field& other) const {
  require_same_grid(*this, other, "Field::operator-");
  auto data = combine(spectrum(), other.spectrum(), std::minus<cplx>{});
  return Field(std::make_shared<const Impl>(grid(), is_real() && other.is_real(), false,
                                            std::move(data)));
}

Field Field::operator*(double scale) const {
  const auto s = spectrum();
  ComplexVector data(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) data[i] = scale * s[i];
  return Field(std::make_shared<const Impl>(grid(), is_real(), false, std::move(data)));
}

Field Field::operator*(cplx scale) const {
  const auto s = spectrum();
  ComplexVector data(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) data[i] = scale * s[i];
  const bool real = is_real() && scale.imag() == 0.0;
  return Field(std::make_shared<const Impl>(grid(), real, false, std::move(data)));
}

void require_same_grid(const Field& a, const Field& b, const char* where) {
  if (!(a.grid() == b.grid())) {
    throw std::invalid_argument(std::string(where) + ": fields live on different grids");
  }
}

}  // namespace envlab
