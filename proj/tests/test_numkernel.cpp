#include <cmath>

#include "doctest.h"
#include "miarec/error.hpp"
#include "miarec/numkernel.hpp"

using namespace miarec;

TEST_CASE("xavier bounds, determinism and mean") {
  Rng rng = make_stream(1);
  const Dense w = xavier_init(2, 4, rng);
  for (double v : w.values()) CHECK(std::abs(v) <= 1.0);

  Rng a = make_stream(9), b = make_stream(9);
  CHECK(xavier_init(6, 5, a) == xavier_init(6, 5, b));

  Rng big = make_stream(2);
  const Dense m = xavier_init(1000, 1000, big);
  double sum = 0.0;
  for (double v : m.values()) sum += v;
  CHECK(std::abs(sum / m.size()) < 0.01);
}

TEST_CASE("adam leaves parameters alone under a zero gradient") {
  Dense p{{0.3, -1.2}};
  AdamState s = AdamState::for_shape(p);
  for (int i = 0; i < 5; ++i) adam_step(p, Dense(1, 2), s, 0.01);
  CHECK(p == Dense{{0.3, -1.2}});
  CHECK(s.step_count == 5);
}

TEST_CASE("adam single step matches the bias-corrected formula") {
  Dense p{{1.0}};
  AdamState s = AdamState::for_shape(p);
  adam_step(p, Dense{{1.0}}, s, 0.001);
  // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
  const double expected = 1.0 - 0.001 * 1.0 / (1.0 + 1e-8);
  CHECK(p[0] == doctest::Approx(expected).epsilon(1e-15));
  CHECK(p[0] == doctest::Approx(0.999));

  // Second step with a different gradient, recomputed by hand.
  adam_step(p, Dense{{-0.5}}, s, 0.001);
  const double m = 0.9 * 0.1 + 0.1 * -0.5;
  const double v = 0.999 * 0.001 + 0.001 * 0.25;
  const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
  CHECK(p[0] == doctest::Approx(expected - 0.001 * mh / (std::sqrt(vh) + 1e-8)).epsilon(1e-14));
}

TEST_CASE("adam runs are reproducible") {
  auto run = [] {
    Dense p{{0.5, 0.25, -1.0}};
    AdamState s = AdamState::for_shape(p);
    for (int i = 0; i < 50; ++i) adam_step(p, Dense{{std::sin(i), std::cos(i), 0.1 * i}}, s, 0.01);
    return p;
  };
  CHECK(run() == run());
}

TEST_CASE("adam rejects mismatched shapes") {
  Dense p(2, 2);
  AdamState s = AdamState::for_shape(p);
  CHECK_THROWS_AS(adam_step(p, Dense(2, 3), s, 0.1), DimensionError);
}

TEST_CASE("finite differences recover known derivatives") {
  Dense x{{3.0}};
  auto sq = finite_difference_gradient([&] { return x[0] * x[0]; }, {&x}, 1e-5);
  CHECK(std::abs(sq[0][0] - 6.0) <= 1e-8);
  CHECK(x[0] == 3.0);

  Dense c{{1.0, 2.0}};
  auto flat = finite_difference_gradient([] { return 4.0; }, {&c}, 1e-5);
  CHECK(flat[0] == Dense(1, 2));

  Dense xy{{2.0, 5.0}};
  auto prod = finite_difference_gradient([](const Dense& v) { return v[0] * v[1]; }, xy, 1e-5);
  CHECK(std::abs(prod[0] - 5.0) <= 1e-7);
  CHECK(std::abs(prod[1] - 2.0) <= 1e-7);
}

TEST_CASE("finite differences refuse non-finite values") {
  Dense x{{0.0}};
  CHECK_THROWS_AS(finite_difference_gradient([&] { return std::log(x[0]); }, {&x}, 1e-5),
                  EvaluationError);
}

TEST_CASE("relative error uses the larger magnitude") {
  CHECK(relative_error(1.0, 1.0) == 0.0);
  CHECK(relative_error(1.0, 0.5) == 0.5);
  CHECK(relative_error(0.0, 1e-9) == doctest::Approx(1e-3));
}
