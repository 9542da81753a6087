#include "integrators.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace envlab::detail {

namespace {

ComplexVector phase_table(const std::vector<double>& lambda, double tau) {
  ComplexVector out(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) out[i] = std::polar(1.0, -lambda[i] * tau);
  return out;
}

// Yoshida triple-jump weights.
const double yoshida_w1 = 1.0 / (2.0 - std::cbrt(2.0));
const double yoshida_w0 = -std::cbrt(2.0) / (2.0 - std::cbrt(2.0));

}  // namespace

Stepper::Stepper(Semilinear problem, Scheme scheme, double h)
    : problem_(std::move(problem)), scheme_(scheme), h_(h), size_(problem_.lambda.size()) {
  if (!(h > 0.0)) throw std::invalid_argument("Stepper: step must be positive");
  k1_.resize(size_);
  k2_.resize(size_);
  k3_.resize(size_);
  k4_.resize(size_);
  tmp_.resize(size_);
  tmp2_.resize(size_);
  const auto& lambda = problem_.lambda;

  switch (scheme_) {
    case Scheme::integrating_factor_rk4:
      phases_.push_back(phase_table(lambda, h));
      phases_.push_back(phase_table(lambda, 0.5 * h));
      break;
    case Scheme::etd_rk4: {
      phases_.push_back(phase_table(lambda, h));
      phases_.push_back(phase_table(lambda, 0.5 * h));
      // Contour-integral evaluation of the phi-function coefficients (full circle;
      // the eigenvalues are imaginary so the real-axis symmetry trick does not apply).
      constexpr int M = 64;
      etd_q_.resize(size_);
      etd_f1_.resize(size_);
      etd_f2_.resize(size_);
      etd_f3_.resize(size_);
      for (std::size_t i = 0; i < size_; ++i) {
        const cplx c(0.0, -lambda[i] * h);
        cplx q = 0, f1 = 0, f2 = 0, f3 = 0;
        for (int k = 1; k <= M; ++k) {
          const cplx z = c + std::polar(1.0, 2.0 * std::numbers::pi * (k - 0.5) / M);
          const cplx ez = std::exp(z);
          const cplx z3 = z * z * z;
          q += (std::exp(0.5 * z) - 1.0) / z;
          f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
          f2 += (2.0 + z + ez * (z - 2.0)) / z3;
          f3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
        }
        etd_q_[i] = h * q / double(M);
        etd_f1_[i] = h * f1 / double(M);
        etd_f2_[i] = h * f2 / double(M);
        etd_f3_[i] = h * f3 / double(M);
      }
      break;
    }
    case Scheme::strang_split:
      split_weights_ = {1.0};
      phases_.push_back(phase_table(lambda, 0.5 * h));
      phases_.push_back(phase_table(lambda, h));
      break;
    case Scheme::composition4:
      split_weights_ = {yoshida_w1, yoshida_w0, yoshida_w1};
      phases_.push_back(phase_table(lambda, 0.5 * yoshida_w1 * h));
      phases_.push_back(phase_table(lambda, 0.5 * (yoshida_w1 + yoshida_w0) * h));
      break;
  }
}

void Stepper::step(double t, std::span<cplx> y) {
  switch (scheme_) {
    case Scheme::integrating_factor_rk4:
      step_lawson(t, y);
      return;
    case Scheme::etd_rk4:
      step_etd(t, y);
      return;
    case Scheme::strang_split:
    case Scheme::composition4:
      step_split(t, y);
      return;
  }
}

void Stepper::step_lawson(double t, std::span<cplx> y) {
  const ComplexVector& E = phases_[0];
  const ComplexVector& E2 = phases_[1];
  const double h = h_;
  auto& N = problem_.nonlinear;

  N(t, y, k1_);
  for (std::size_t i = 0; i < size_; ++i) tmp_[i] = E2[i] * (y[i] + 0.5 * h * k1_[i]);
  N(t + 0.5 * h, tmp_, k2_);
  for (std::size_t i = 0; i < size_; ++i) tmp_[i] = E2[i] * y[i] + 0.5 * h * k2_[i];
  N(t + 0.5 * h, tmp_, k3_);
  for (std::size_t i = 0; i < size_; ++i) tmp_[i] = E[i] * y[i] + h * E2[i] * k3_[i];
  N(t + h, tmp_, k4_);
  for (std::size_t i = 0; i < size_; ++i) {
    y[i] = E[i] * y[i] +
           (h / 6.0) * (E[i] * k1_[i] + 2.0 * E2[i] * (k2_[i] + k3_[i]) + k4_[i]);
  }
}

void Stepper::step_etd(double t, std::span<cplx> y) {
  const ComplexVector& E = phases_[0];
  const ComplexVector& E2 = phases_[1];
  const double h = h_;
  auto& N = problem_.nonlinear;

  // k1 = N(y), k2 = N(a), k3 = N(b), k4 = N(c)
  N(t, y, k1_);
  for (std::size_t i = 0; i < size_; ++i) tmp_[i] = E2[i] * y[i] + etd_q_[i] * k1_[i];
  N(t + 0.5 * h, tmp_, k2_);
  for (std::size_t i = 0; i < size_; ++i) tmp2_[i] = E2[i] * y[i] + etd_q_[i] * k2_[i];
  N(t + 0.5 * h, tmp2_, k3_);
  for (std::size_t i = 0; i < size_; ++i) {
    tmp2_[i] = E2[i] * tmp_[i] + etd_q_[i] * (2.0 * k3_[i] - k1_[i]);
  }
  N(t + h, tmp2_, k4_);
  for (std::size_t i = 0; i < size_; ++i) {
    y[i] = E[i] * y[i] + etd_f1_[i] * k1_[i] + 2.0 * etd_f2_[i] * (k2_[i] + k3_[i]) +
           etd_f3_[i] * k4_[i];
  }
}

void Stepper::linear(std::span<cplx> y, const ComplexVector& phase) const {
  for (std::size_t i = 0; i < size_; ++i) y[i] *= phase[i];
}

void Stepper::nonlinear_substep(double t, double h, std::span<cplx> y) {
  if (problem_.nonlinear_flow) {
    problem_.nonlinear_flow(t, h, y);
    return;
  }
  auto& N = problem_.nonlinear;
  N(t, y, k1_);
  for (std::size_t i = 0; i < size_; ++i) tmp_[i] = y[i] + 0.5 * h * k1_[i];
  N(t + 0.5 * h, tmp_, k2_);
  for (std::size_t i = 0; i < size_; ++i) tmp_[i] = y[i] + 0.5 * h * k2_[i];
  N(t + 0.5 * h, tmp_, k3_);
  for (std::size_t i = 0; i < size_; ++i) tmp_[i] = y[i] + h * k3_[i];
  N(t + h, tmp_, k4_);
  for (std::size_t i = 0; i < size_; ++i) {
    y[i] += (h / 6.0) * (k1_[i] + 2.0 * (k2_[i] + k3_[i]) + k4_[i]);
  }
}

void Stepper::step_split(double t, std::span<cplx> y) {
  const double h = h_;
  if (scheme_ == Scheme::strang_split) {
    linear(y, phases_[0]);
    nonlinear_substep(t, h, y);
    linear(y, phases_[0]);
    return;
  }
  const double a = yoshida_w1 * h;
  const double b = yoshida_w0 * h;
  linear(y, phases_[0]);
  nonlinear_substep(t, a, y);
  linear(y, phases_[1]);
  nonlinear_substep(t + a, b, y);
  linear(y, phases_[1]);
  nonlinear_substep(t + a + b, a, y);
  linear(y, phases_[0]);
}

}  // namespace envlab::detail
