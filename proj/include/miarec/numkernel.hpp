#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "miarec/dense.hpp"
#include "miarec/rng.hpp"

namespace miarec {

/// Entries i.i.d. uniform on +-sqrt(6 / (rows + cols)).
Dense xavier_init(std::size_t rows, std::size_t cols, Rng& rng);

struct AdamState {
  Dense first_moment;
  Dense second_moment;
  std::size_t step_count = 0;

  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double epsilon = 1e-8;

  static AdamState for_shape(const Dense& param) {
    return {Dense(param.rows(), param.cols()), Dense(param.rows(), param.cols()), 0};
  }
};

/// One bias-corrected Adam update of `param` in place.
void adam_step(Dense& param, const Dense& grad, AdamState& state, double lr);

using ScalarFunction = std::function<double()>;

/// Central-difference gradient of `f` with respect to every entry of every
/// matrix in `params`. `f` must read the matrices through the same pointers;
/// each entry is restored after probing. Throws EvaluationError if `f` returns
/// a non-finite value.
std::vector<Dense> finite_difference_gradient(const ScalarFunction& f,
                                              const std::vector<Dense*>& params, double eps);

/// Single-matrix convenience form: f takes the probed point.
Dense finite_difference_gradient(const std::function<double(const Dense&)>& f, const Dense& at,
                                 double eps);

/// |a - b| / max(|a|, |b|, floor), the element-wise relative error used by
/// every gradient check in this project.
double relative_error(double analytic, double numeric, double floor = 1e-6);
double max_relative_error(const Dense& analytic, const Dense& numeric, double floor = 1e-6);

}  // namespace miarec
