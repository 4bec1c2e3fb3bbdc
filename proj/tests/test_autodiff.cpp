// Each tape operation is checked against central differences of the same
// scalar function evaluated on plain values.

#include <functional>
#include <memory>
#include <vector>

#include "doctest.h"
#include "miarec/autodiff.hpp"
#include "miarec/numkernel.hpp"

using namespace miarec;

namespace {

using Graph = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

// Reduces any output to a scalar with fixed random weights so every output
// entry contributes a distinct amount.
ad::Var reduce(ad::Tape& tape, ad::Var out) {
  Rng rng = make_stream(77, {out.rows(), out.cols()});
  Dense w = xavier_init(out.rows(), out.cols(), rng);
  return ad::sum_squares(ad::add(ad::mul_const(out, w), tape.constant(Dense(out.rows(), out.cols(), 0.1))));
}

void check_gradients(const Graph& f, std::vector<Dense> inputs, double tol = 1e-6) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const Dense& x : inputs) vars.push_back(tape.parameter(x));
  ad::Var loss = reduce(tape, f(tape, vars));
  tape.backward(loss);

  std::vector<Dense*> ptrs;
  for (Dense& x : inputs) ptrs.push_back(&x);
  auto value = [&] {
    ad::Tape t;
    std::vector<ad::Var> v;
    for (const Dense& x : inputs) v.push_back(t.constant(x));
    return reduce(t, f(t, v)).value()[0];
  };
  const auto numeric = finite_difference_gradient(value, ptrs, 1e-6);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Dense& g = vars[i].grad();
    REQUIRE(g.same_shape(numeric[i]));
    CHECK(max_relative_error(g, numeric[i], 1e-6) <= tol);
  }
}

Dense rnd(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng = make_stream(seed);
  return xavier_init(r, c, rng);
}

std::shared_ptr<const kernels::SparseRows> small_adjacency() {
  return std::make_shared<const kernels::SparseRows>(
      kernels::SparseRows::from_lists(5, {{1, 2}, {0}, {}, {0, 1, 4}, {3, 3}}));
}

}  // namespace

TEST_CASE("elementwise and linear ops") {
  check_gradients([](ad::Tape&, const auto& v) { return ad::matmul_bt(v[0], v[1]); },
                  {rnd(3, 4, 1), rnd(5, 4, 2)});
  check_gradients([](ad::Tape&, const auto& v) { return ad::sub(ad::add(v[0], v[1]), v[1]); },
                  {rnd(3, 4, 3), rnd(3, 4, 4)});
  check_gradients([](ad::Tape&, const auto& v) { return ad::add_row(v[0], v[1]); },
                  {rnd(3, 4, 5), rnd(1, 4, 6)});
  check_gradients([](ad::Tape&, const auto& v) { return ad::scale(ad::tanh(v[0]), -1.5); },
                  {rnd(2, 6, 7)});
  check_gradients([](ad::Tape&, const auto& v) { return ad::relu(v[0]); }, {rnd(4, 4, 8)});
  check_gradients([](ad::Tape&, const auto& v) { return ad::leaky_relu(v[0], 0.2); },
                  {rnd(4, 4, 9)});
}

TEST_CASE("structural ops") {
  check_gradients(
      [](ad::Tape&, const auto& v) { return ad::concat_cols({v[0], v[1], v[0]}); },
      {rnd(3, 2, 10), rnd(3, 5, 11)});
  check_gradients(
      [](ad::Tape&, const auto& v) { return ad::gather_rows(v[0], {2, 0, 2, 1}); },
      {rnd(3, 4, 12)});
  check_gradients([](ad::Tape&, const auto& v) { return ad::column(v[0], 2); }, {rnd(3, 4, 13)});
  check_gradients([](ad::Tape&, const auto& v) { return ad::row_dot(v[0], v[1]); },
                  {rnd(3, 4, 14), rnd(3, 4, 15)});
  check_gradients([](ad::Tape&, const auto& v) { return ad::row_softmax(v[0]); },
                  {rnd(4, 3, 16)});
  check_gradients([](ad::Tape&, const auto& v) { return ad::row_scale(v[0], v[1]); },
                  {rnd(4, 3, 17), rnd(4, 1, 18)});
  check_gradients([](ad::Tape&, const auto& v) { return ad::mean({v[0], v[1], v[1]}); },
                  {rnd(2, 3, 19), rnd(2, 3, 20)});
}

TEST_CASE("loss ops") {
  check_gradients([](ad::Tape&, const auto& v) { return ad::neg_log_sigmoid_sum(v[0]); },
                  {rnd(6, 1, 21)});
  check_gradients([](ad::Tape&, const auto& v) { return ad::sum_squares(v[0]); },
                  {rnd(3, 3, 22)});
}

TEST_CASE("sparse aggregation ops") {
  auto adj = small_adjacency();
  check_gradients([adj](ad::Tape&, const auto& v) { return ad::spmm(adj, v[0], v[1]); },
                  {rnd(adj->nnz(), 1, 23), rnd(5, 3, 24)});
  check_gradients([adj](ad::Tape&, const auto& v) { return ad::edge_scores(adj, v[0], v[1]); },
                  {rnd(5, 3, 25), rnd(1, 6, 26)});
  check_gradients([adj](ad::Tape&, const auto& v) { return ad::segment_softmax(adj, v[0]); },
                  {rnd(adj->nnz(), 1, 27)});
}

TEST_CASE("segment softmax normalises each row") {
  auto adj = small_adjacency();
  ad::Tape tape;
  ad::Var e = tape.constant(rnd(adj->nnz(), 1, 28));
  const Dense s = ad::segment_softmax(adj, e).value();
  for (std::size_t i = 0; i < adj->n_rows; ++i) {
    if (adj->degree(i) == 0) continue;
    double sum = 0.0;
    for (std::size_t k = adj->row_begin(i); k < adj->row_end(i); ++k) sum += s[k];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("gradients accumulate over repeated uses") {
  ad::Tape tape;
  ad::Var x = tape.parameter(Dense{{2.0}});
  ad::Var y = ad::sum_squares(ad::add(x, x));  // (2x)^2
  tape.backward(y);
  CHECK(x.grad()[0] == doctest::Approx(16.0));
}

TEST_CASE("constants receive no gradient") {
  ad::Tape tape;
  ad::Var c = tape.constant(Dense{{1.0, 2.0}});
  ad::Var p = tape.parameter(Dense{{3.0, 4.0}});
  tape.backward(ad::sum_squares(ad::add(c, p)));
  CHECK(c.grad().empty());
  CHECK(p.grad() == Dense{{8.0, 12.0}});
}
