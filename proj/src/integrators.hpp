#pragma once

#include <functional>
#include <span>
#include <vector>

#include "envlab/solvers.hpp"
#include "envlab/types.hpp"

namespace envlab::detail {

/// y' = -i lambda y + N(t, y), diagonal lambda (one entry per component of y).
struct Semilinear {
  std::vector<double> lambda;
  std::function<void(double t, std::span<const cplx> y, std::span<cplx> out)> nonlinear;
  /// Exact flow of y' = N(t, y) over [t, t + h]; classical RK4 is used when empty.
  std::function<void(double t, double h, std::span<cplx> y)> nonlinear_flow;
};

/// Fixed-step integrator for a Semilinear problem.
class Stepper {
 public:
  Stepper(Semilinear problem, Scheme scheme, double h);

  /// Advance y from t to t + h.
  void step(double t, std::span<cplx> y);

 private:
  void step_lawson(double t, std::span<cplx> y);
  void step_etd(double t, std::span<cplx> y);
  void step_split(double t, std::span<cplx> y);
  void linear(std::span<cplx> y, const ComplexVector& phase) const;
  void nonlinear_substep(double t, double h, std::span<cplx> y);

  Semilinear problem_;
  Scheme scheme_;
  double h_;
  std::size_t size_;
  // Phases exp(-i lambda tau) for the sub-step lengths a scheme needs.
  std::vector<ComplexVector> phases_;
  std::vector<double> split_weights_;
  ComplexVector etd_q_, etd_f1_, etd_f2_, etd_f3_;
  ComplexVector k1_, k2_, k3_, k4_, tmp_, tmp2_;
};

}  // namespace envlab::detail
