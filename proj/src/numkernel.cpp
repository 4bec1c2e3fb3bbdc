#include "miarec/numkernel.hpp"

#include <algorithm>
#include <cmath>

#include "miarec/error.hpp"

namespace miarec {

Dense xavier_init(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Dense out(rows, cols);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dist(rng);
  return out;
}

void adam_step(Dense& param, const Dense& grad, AdamState& state, double lr) {
  require_same_shape(param, grad, "adam_step");
  require_same_shape(param, state.first_moment, "adam_step state");
  require_same_shape(param, state.second_moment, "adam_step state");
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(AdamState::beta1, t);
  const double c2 = 1.0 - std::pow(AdamState::beta2, t);
  for (std::size_t i = 0; i < param.size(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = AdamState::beta1 * m + (1.0 - AdamState::beta1) * grad[i];
    v = AdamState::beta2 * v + (1.0 - AdamState::beta2) * grad[i] * grad[i];
    param[i] -= lr * (m / c1) / (std::sqrt(v / c2) + AdamState::epsilon);
  }
}

std::vector<Dense> finite_difference_gradient(const ScalarFunction& f,
                                              const std::vector<Dense*>& params, double eps) {
  if (!(eps > 0.0)) throw DomainError("finite difference step must be positive");
  std::vector<Dense> grads;
  grads.reserve(params.size());
  for (Dense* p : params) {
    Dense g(p->rows(), p->cols());
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double orig = (*p)[i];
      (*p)[i] = orig + eps;
      const double up = f();
      (*p)[i] = orig - eps;
      const double down = f();
      (*p)[i] = orig;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw EvaluationError("non-finite function value during finite differencing");
      }
      g[i] = (up - down) / (2.0 * eps);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

Dense finite_difference_gradient(const std::function<double(const Dense&)>& f, const Dense& at,
                                 double eps) {
  Dense x(at);
  auto grads = finite_difference_gradient([&] { return f(x); }, {&x}, eps);
  return std::move(grads.front());
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

double max_relative_error(const Dense& analytic, const Dense& numeric, double floor) {
  require_same_shape(analytic, numeric, "max_relative_error");
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, relative_error(analytic[i], numeric[i], floor));
  }
  return worst;
}

}  // namespace miarec
