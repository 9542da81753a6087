#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "envlab/spectral.hpp"
#include "fft.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace envlab;
using testutil::max_abs;
using testutil::max_abs_diff;
using testutil::random_field;
using oracle::convolution_oracle;

namespace {

const double pi = std::numbers::pi;

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(TorusGrid(2.0 * pi, 48), std::invalid_argument);
  CHECK_THROWS_AS(TorusGrid(2.0 * pi, 8), std::invalid_argument);
  CHECK_THROWS_AS(TorusGrid(7.0, 64), std::invalid_argument);
  const TorusGrid g = TorusGrid::with_periods(8, 64);
  CHECK(g.periods() == 8.0);
  CHECK(g.wavenumber(31) == 31);
  CHECK(g.wavenumber(32) == -32);
  CHECK(g.frequency(g.index_of(8)) == doctest::Approx(1.0));
  CHECK(g.lattice_index(1.0).value() == 8);
  CHECK_FALSE(g.lattice_index(0.01).has_value());
}

TEST_CASE("field round trip and Parseval") {
  const TorusGrid g = TorusGrid::with_periods(4, 256);
  const Field f = Field::sample(g, [](double x) {
    return cplx(std::exp(std::sin(x / 4.0)), std::cos(3.0 * x / 4.0));
  });
  const Field back = Field::from_spectrum(g, f.spectrum());
  CHECK(max_abs_diff(back.values(), f.values()) <= 10 * std::numeric_limits<double>::epsilon() * max_abs(f.values()));

  double l2 = 0.0;
  for (const auto& v : f.values()) l2 += std::norm(v);
  l2 *= g.dx();
  double spec = 0.0;
  for (const auto& c : f.spectrum()) spec += std::norm(c);
  spec *= g.length();
  CHECK(std::abs(l2 - spec) <= 1e-12 * l2);

  const Field r = random_field(g, 40, 3, true);
  const auto s = r.spectrum();
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(s[g.size() - i] == std::conj(s[i]));
  }
  for (const auto& v : r.values()) CHECK(v.imag() == 0.0);
}

TEST_CASE("apply_multiplier examples") {
  const TorusGrid g = TorusGrid::with_periods(8, 64);
  const Field e1 = Field::mode(g, 8);
  const Field k = apply_multiplier(e1, [](double xi) { return bracket(xi); });
  CHECK(k.spectrum()[8].real() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));

  const Field r = random_field(g, 20, 5);
  const Field same = apply_multiplier(r, [](double) { return 1.0; });
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(same.spectrum()[i] == r.spectrum()[i]);

  const Field e2 = Field::mode(g, 16);
  const Field q = apply_multiplier(e2, [](double xi) { return xi * xi / (4.0 * std::sqrt(2.0)); });
  CHECK(q.spectrum()[16].real() == doctest::Approx(0.70710678118654752).epsilon(1e-15));

  CHECK_THROWS_AS(apply_multiplier(r, [](double xi) { return 1.0 / xi; }), std::invalid_argument);

  const Field rr = random_field(g, 20, 6, true);
  CHECK(apply_multiplier(rr, [](double xi) { return bracket(xi); }).is_real());
  CHECK(apply_multiplier(rr, [](double xi) { return cplx(0.0, xi); }).is_real());
  CHECK_FALSE(apply_multiplier(rr, [](double) { return cplx(1.0, 1.0); }).is_real());
}

TEST_CASE("lp_project sharp and smooth") {
  const TorusGrid g = TorusGrid::with_periods(1, 64);
  const Field e3 = Field::mode(g, 3);
  CHECK(max_abs_diff(lp_project(e3, 2, LpMode::high, true).spectrum(), e3.spectrum()) == 0.0);
  CHECK(max_abs(lp_project(e3, 4, LpMode::high, true).spectrum()) == 0.0);
  CHECK_THROWS_AS(lp_project(e3, 0, LpMode::low, true), std::invalid_argument);

  const Field r = random_field(g, 31, 9);
  const Field lo = lp_project(r, 5.5, LpMode::low, true);
  const Field hi = lp_project(r, 5.5, LpMode::high, true);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(lo.spectrum()[i] + hi.spectrum()[i] == r.spectrum()[i]);
  }

  // Flat spectrum on |xi| <= 8 (L = 2*pi*4 so the lattice is finer than 1).
  const TorusGrid g4 = TorusGrid::with_periods(4, 128);
  ComplexVector flat(g4.size(), cplx(0.0, 0.0));
  for (long j = -32; j <= 32; ++j) flat[g4.index_of(j)] = 1.0;
  const Field f = Field::from_spectrum(g4, flat);
  ComplexVector sum(g4.size(), cplx(0.0, 0.0));
  for (int k = -10; k <= 10; ++k) {
    const Field b = lp_project(f, std::ldexp(1.0, k), LpMode::band, false);
    for (std::size_t i = 0; i < g4.size(); ++i) sum[i] += b.spectrum()[i];
  }
  flat[0] = 0.0;
  CHECK(max_abs_diff(sum, flat) <= 1e-12);

  // Smooth low plus high is the identity; low collects the bands below N.
  const Field slo = lp_project(f, 4, LpMode::low, false);
  const Field shi = lp_project(f, 4, LpMode::high, false);
  ComplexVector acc(g4.size(), cplx(0.0, 0.0));
  for (int k = -10; k <= 1; ++k) {
    const Field b = lp_project(f, std::ldexp(1.0, k), LpMode::band, false);
    for (std::size_t i = 0; i < g4.size(); ++i) acc[i] += b.spectrum()[i];
  }
  for (std::size_t i = 1; i < g4.size(); ++i) {
    CHECK(std::abs(slo.spectrum()[i] + shi.spectrum()[i] - f.spectrum()[i]) <= 1e-15);
    CHECK(std::abs(acc[i] - slo.spectrum()[i]) <= 1e-12);
  }
  CHECK(lp_plateau(1.0) == 1.0);
  CHECK(lp_plateau(2.0) == 0.0);
  CHECK(lp_plateau(1.5) == doctest::Approx(0.5));
}

TEST_CASE("m_multiplier") {
  const TorusGrid g = TorusGrid::with_periods(1, 64);
  CHECK(m_multiplier(Field::mode(g, 5), 10).spectrum()[5].real() == doctest::Approx(0.5));
  CHECK(m_multiplier(Field::mode(g, -20), 10).spectrum()[g.index_of(-20)].real() == 1.0);
  CHECK(max_abs(m_multiplier(Field::mode(g, 0, 3.0), 7).spectrum()) == 0.0);
  CHECK_THROWS_AS(m_multiplier(Field::mode(g, 1), -1), std::invalid_argument);
  double prev = 0.0;
  for (double xi = 0; xi < 40; xi += 0.25) {
    const double m = m_symbol(xi, 10);
    CHECK(m >= prev);
    CHECK(m <= 1.0);
    prev = m;
  }
}

TEST_CASE("norms") {
  const TorusGrid g = TorusGrid::with_periods(8, 64);
  const Field e = Field::mode(g, 8, 1.0 / std::sqrt(g.length()));
  CHECK(norm(e, NormSpec::sobolev(1, 1)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  const Field r = random_field(g, 25, 11);
  const double l2 = norm(r, NormSpec::sobolev(0));
  CHECK(std::abs(l2 - norm(r, NormSpec::lebesgue(2))) <= 1e-12 * l2);

  const TorusGrid g1 = TorusGrid::with_periods(1, 32);
  const Field c = Field::sample_real(g1, [](double) { return 1.7; });
  CHECK(norm(c, NormSpec::lebesgue(4)) == doctest::Approx(1.7 * std::pow(2 * pi, 0.25)).epsilon(1e-14));

  double prev = norm(r, NormSpec::sobolev(1, 1.0));
  for (double eps = 0.5; eps > 1e-4; eps /= 2) {
    const double h = norm(r, NormSpec::sobolev(1, eps));
    CHECK(h <= prev);
    CHECK(h >= l2);
    prev = h;
  }
  CHECK(std::abs(prev - l2) < 1e-6 * l2);
}

TEST_CASE("dealiased cubic matches the convolution oracle") {
  const TorusGrid g = TorusGrid::with_periods(8, 64);
  const Field e1 = Field::mode(g, 8);
  const Field cube = dealiased_cubic(e1, e1, e1);
  CHECK(std::abs(cube.spectrum()[24] - 1.0) <= 1e-15);
  CHECK(max_abs(cube.spectrum()) == doctest::Approx(1.0));

  const Field e5 = Field::mode(g, 5);
  const Field mod = dealiased_cubic(e5, e5, e5, {false, true, false});
  CHECK(std::abs(mod.spectrum()[5] - 1.0) <= 1e-15);

  const Field top = Field::mode(g, 31);
  CHECK(max_abs(dealiased_cubic(top, top, top).spectrum()) <= 1e-15);

  for (std::size_t n : {16u, 32u, 64u}) {
    const TorusGrid gn = TorusGrid::with_periods(2, n);
    const long band = static_cast<long>(n / 2);
    // Include the Nyquist mode: random on all modes.
    const Field a = random_field(gn, band, 21);
    const Field b = random_field(gn, band, 22);
    const Field c = random_field(gn, band, 23);
    for (int pat = 0; pat < 8; ++pat) {
      const ConjPattern p = {bool(pat & 1), bool(pat & 2), bool(pat & 4)};
      const Field got = dealiased_cubic(a, b, c, p);
      const ComplexVector want = convolution_oracle(a, b, c, p);
      CHECK(max_abs_diff(got.spectrum(), want) <= 1e-12 * max_abs(want));
    }
  }
}

TEST_CASE("energies") {
  const TorusGrid g = TorusGrid::with_periods(1, 32);
  const Field z = Field::zeros(g);
  CHECK(energy_physical(z, z) == 0.0);
  CHECK(energy_rescaled(z, z, 0.3) == 0.0);

  const Field u = Field::sample_real(g, [](double x) { return std::cos(x); });
  CHECK(energy_physical(u, z) == doctest::Approx(3.7306412761378795).epsilon(1e-14));
  CHECK(energy_physical(u, z) == doctest::Approx(pi + 3 * pi / 16).epsilon(1e-14));

  const Field one = Field::sample_real(g, [](double) { return 1.0; });
  CHECK(energy_rescaled(one, z, 1.0) == doctest::Approx(1.5 * pi).epsilon(1e-14));

  const TorusGrid g8 = TorusGrid::with_periods(8, 128);
  const Field v = random_field(g8, 30, 31, true);
  const Field vt = random_field(g8, 30, 32, true);
  const double l2t = norm(vt, NormSpec::sobolev(0));
  CHECK(energy_physical(v, vt * 2.0) - energy_physical(v, vt) ==
        doctest::Approx(1.5 * l2t * l2t).epsilon(1e-12));

  const double eps = 0.25;
  const double quad = energy_rescaled(v, Field::zeros(g8), eps) - 0.25 * eps * eps * quartic_integral(v);
  const double h1 = norm(v, NormSpec::sobolev(1, eps));
  CHECK(quad == doctest::Approx(0.5 * h1 * h1).epsilon(1e-13));

  CHECK_THROWS_AS(energy_physical(Field::mode(g, 1), z), std::invalid_argument);
}

TEST_CASE("quartic integral is exact including the Nyquist mode") {
  const TorusGrid g = TorusGrid::with_periods(1, 16);
  // Real field with Nyquist coefficient: cos(8x) interpolant split evenly.
  ComplexVector s(16, cplx(0.0, 0.0));
  s[8] = 1.0;
  const Field u = Field::from_real_spectrum(g, s);
  // Interpolant is cos(8x); int cos^4 over [0, 2 pi) = 3 pi / 4.
  CHECK(quartic_integral(u) == doctest::Approx(0.75 * pi).epsilon(1e-14));
}

TEST_CASE("next smooth size") {
  CHECK(fft::next_smooth_size(1) == 1);
  CHECK(fft::next_smooth_size(7) == 8);
  CHECK(fft::next_smooth_size(2049) == 2160);
  CHECK(fft::next_smooth_size(1000) == 1000);
}
