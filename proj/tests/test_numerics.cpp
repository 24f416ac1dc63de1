// Tensor arithmetic, tape operations and their gradients, seeded randomness,
// and parameter initialization. Expected values come from independent
// recomputations (triple loops, exp/normalize, log-sum-exp) rather than from
// the code under test.
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "graphqa/errors.hpp"
#include "graphqa/params.hpp"
#include "graphqa/rng.hpp"
#include "graphqa/tape.hpp"
#include "graphqa/tensor.hpp"

using namespace graphqa;

namespace {

// Plain triple-loop matrix product, kept deliberately independent of Tape.
Tensor matmul_oracle(const Tensor& a, const Tensor& b) {
  Tensor out = Tensor::mat(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k)
      for (std::size_t j = 0; j < b.cols(); ++j)
        out.at(i, j) += a.at(i, k) * b.at(k, j);
  return out;
}

std::vector<double> softmax_oracle(const std::vector<double>& v) {
  double m = v[0];
  for (double x : v) m = std::max(m, x);
  std::vector<double> out(v.size());
  double z = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) z += (out[i] = std::exp(v[i] - m));
  for (double& x : out) x /= z;
  return out;
}

double cross_entropy_oracle(const std::vector<double>& logits, std::size_t label) {
  double m = logits[0];
  for (double x : logits) m = std::max(m, x);
  double z = 0.0;
  for (double x : logits) z += std::exp(x - m);
  return std::log(z) + m - logits[label];
}

Tensor random_tensor(Rng& rng, Shape shape) {
  Tensor t(std::move(shape));
  for (double& x : t.data) x = rng.uniform(-2.0, 2.0);
  return t;
}

}  // namespace

TEST_SUITE("numerics") {

TEST_CASE("tensor constructors and accessors") {
  Tensor s = Tensor::scalar(3.5);
  CHECK(s.is_scalar());
  CHECK(s.data[0] == 3.5);

  Tensor v = Tensor::vec({1.0, 2.0, 3.0});
  CHECK(v.is_vector());
  CHECK(v.numel() == 3);

  Tensor m = Tensor::mat(2, 3, 0.5);
  CHECK(m.is_matrix());
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  m.at(1, 2) = 7.0;
  CHECK(m.data[5] == 7.0);

  CHECK_THROWS_AS(Tensor(Shape{0}), ShapeError);
  CHECK_THROWS_AS(Tensor(Shape{2, 0}), ShapeError);
}

TEST_CASE("softmax_values matches exp/normalize oracle and handles extremes") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(1 + rng.below(8));
    for (double& x : v) x = rng.uniform(-30.0, 30.0);
    auto got = softmax_values(v);
    auto want = softmax_oracle(v);
    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
      total += got[i];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Large magnitudes must not overflow thanks to max subtraction.
  auto big = softmax_values({1000.0, 1000.0});
  CHECK(big[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(softmax_values({}), DomainError);
  CHECK_THROWS_AS(softmax_values({1.0, std::nan("")}), DomainError);
}

TEST_CASE("argmax picks the lowest index on ties") {
  CHECK(argmax({1.0, 3.0, 3.0, 2.0}) == 1);
  CHECK(argmax({5.0}) == 0);
  CHECK(argmax({-1.0, -1.0, -1.0}) == 0);
}

TEST_CASE("tape matmul matches the triple-loop oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t m = 1 + rng.below(5), k = 1 + rng.below(5), n = 1 + rng.below(5);
    Tensor a = random_tensor(rng, {m, k});
    Tensor b = random_tensor(rng, {k, n});
    Tape tape;
    NodeId r = tape.matmul(tape.leaf(a), tape.leaf(b));
    Tensor want = matmul_oracle(a, b);
    for (std::size_t i = 0; i < want.numel(); ++i)
      CHECK(tape.value(r).data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
  }
}

TEST_CASE("tape matvec, vecmat, and dot agree with explicit sums") {
  Rng rng(8);
  Tensor w = random_tensor(rng, {3, 4});
  Tensor x = random_tensor(rng, {4});
  Tensor y = random_tensor(rng, {3});

  Tape tape;
  NodeId wx = tape.matvec(tape.leaf(w), tape.leaf(x));
  for (std::size_t i = 0; i < 3; ++i) {
    double want = 0.0;
    for (std::size_t j = 0; j < 4; ++j) want += w.at(i, j) * x[j];
    CHECK(tape.value(wx)[i] == doctest::Approx(want).epsilon(1e-12));
  }

  NodeId yw = tape.vecmat(tape.leaf(y), tape.leaf(w));
  for (std::size_t j = 0; j < 4; ++j) {
    double want = 0.0;
    for (std::size_t i = 0; i < 3; ++i) want += y[i] * w.at(i, j);
    CHECK(tape.value(yw)[j] == doctest::Approx(want).epsilon(1e-12));
  }

  NodeId d = tape.dot(tape.leaf(x), tape.leaf(x));
  double want = 0.0;
  for (std::size_t j = 0; j < 4; ++j) want += x[j] * x[j];
  CHECK(tape.value(d).data[0] == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("tape shape ops: concat, index, row, stack_rows") {
  Tape tape;
  NodeId a = tape.leaf(Tensor::vec({1.0, 2.0}));
  NodeId b = tape.leaf(Tensor::vec({3.0}));
  NodeId c = tape.concat({a, b});
  CHECK(tape.value(c).data == std::vector<double>{1.0, 2.0, 3.0});

  NodeId i1 = tape.index(c, 1);
  CHECK(tape.value(i1).is_scalar());
  CHECK(tape.value(i1).data[0] == 2.0);
  CHECK_THROWS_AS(tape.index(c, 3), DomainError);

  NodeId m = tape.stack_rows({a, tape.leaf(Tensor::vec({4.0, 5.0}))});
  CHECK(tape.value(m).rows() == 2);
  CHECK(tape.value(m).at(1, 0) == 4.0);
  NodeId r = tape.row(m, 1);
  CHECK(tape.value(r).data == std::vector<double>{4.0, 5.0});
  CHECK_THROWS_AS(tape.row(m, 2), DomainError);
}

TEST_CASE("cross_entropy matches log-sum-exp oracle") {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> logits(2 + rng.below(6));
    for (double& x : logits) x = rng.uniform(-10.0, 10.0);
    std::size_t label = rng.below(logits.size());
    Tape tape;
    NodeId ce = tape.cross_entropy(tape.leaf(Tensor::vec(logits)), label);
    CHECK(tape.value(ce).data[0] ==
          doctest::Approx(cross_entropy_oracle(logits, label)).epsilon(1e-12));
  }
}

TEST_CASE("cross_entropy_rows averages per-row losses") {
  Tape tape;
  Tensor m = Tensor::mat(2, 3);
  m.data = {1.0, -2.0, 0.5, 0.0, 3.0, -1.0};
  NodeId ce = tape.cross_entropy_rows(tape.leaf(m), {2, 1});
  double want = (cross_entropy_oracle({1.0, -2.0, 0.5}, 2) +
                 cross_entropy_oracle({0.0, 3.0, -1.0}, 1)) /
                2.0;
  CHECK(tape.value(ce).data[0] == doctest::Approx(want).epsilon(1e-12));
  CHECK_THROWS_AS(tape.cross_entropy_rows(tape.leaf(m), {2}), DomainError);
  CHECK_THROWS_AS(tape.cross_entropy_rows(tape.leaf(m), {2, 3}), DomainError);
}

TEST_CASE("backward: d(x*x)/dx at 3 is 6") {
  ParameterStore store(1);
  Param& p = store.create("x", {1});
  p.value.data[0] = 3.0;
  Tape tape;
  NodeId x = tape.param(p);
  tape.backward(tape.mul(x, x));
  CHECK(p.grad.data[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("backward accumulates through fan-out") {
  // y = sum(x) + sum(x): every element's gradient is exactly 2.
  ParameterStore store(1);
  Param& p = store.create("x", {3});
  Tape tape;
  NodeId x = tape.param(p);
  NodeId ones = tape.leaf(Tensor::vec({1.0, 1.0, 1.0}));
  NodeId s = tape.dot(x, ones);
  tape.backward(tape.add(s, s));
  for (double g : p.grad.data) CHECK(g == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("detach blocks gradient flow") {
  ParameterStore store(1);
  Param& p = store.create("x", {1});
  p.value.data[0] = 2.0;
  Tape tape;
  NodeId x = tape.param(p);
  NodeId frozen = tape.detach(x);
  tape.backward(tape.mul(x, frozen));  // y = x * const(x)
  CHECK(p.grad.data[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("backward requires a scalar root") {
  Tape tape;
  NodeId v = tape.leaf(Tensor::vec({1.0, 2.0}));
  CHECK_THROWS_AS(tape.backward(v), ShapeError);
}

TEST_CASE("gradcheck validates every primitive against central differences") {
  // One composite expression touches add, sub, mul, scale, smul, sum, mean,
  // relu, sigmoid, matmul, matvec, vecmat, dot, concat, index, row,
  // stack_rows, softmax, and both cross-entropy forms.
  ParameterStore store(123);
  store.create("w", {3, 3});
  store.create("u", {3});
  store.create("v", {3});

  auto build_loss = [&store](Tape& tape) -> NodeId {
    Ctx ctx{tape, store};
    NodeId w = ctx.P("w");
    NodeId u = ctx.P("u");
    NodeId v = ctx.P("v");
    NodeId wu = tape.matvec(w, u);
    NodeId uvw = tape.vecmat(v, w);
    NodeId mixed = tape.add(tape.relu(wu), tape.sigmoid(uvw));
    NodeId both = tape.mul(mixed, tape.sub(u, tape.scale(v, 0.25)));
    NodeId cat = tape.concat({both, tape.mean({u, v})});
    NodeId sm = tape.softmax(cat);
    NodeId picked = tape.smul(tape.index(sm, 2), tape.sum({u, v}));
    NodeId rows = tape.stack_rows({picked, both});
    NodeId mm = tape.matmul(rows, w);
    NodeId ce = tape.cross_entropy_rows(mm, {0, 2});
    NodeId ce2 = tape.cross_entropy(tape.row(mm, 1), 1);
    return tape.add(ce, tape.add(ce2, tape.dot(picked, both)));
  };

  GradCheckReport rep = gradcheck(store, build_loss);
  CHECK(rep.max_rel_error < 1e-6);
}

TEST_CASE("repeated forward passes are bit-identical") {
  ParameterStore store(5);
  store.create("w", {4, 4});
  store.create("x", {4});
  auto run = [&store]() {
    Tape tape;
    Ctx ctx{tape, store};
    NodeId y = tape.softmax(tape.matvec(ctx.P("w"), tape.relu(ctx.P("x"))));
    return tape.value(y).data;
  };
  CHECK(run() == run());
}

TEST_CASE("shape mismatches throw ShapeError") {
  Tape tape;
  NodeId a = tape.leaf(Tensor::vec({1.0, 2.0}));
  NodeId b = tape.leaf(Tensor::vec({1.0, 2.0, 3.0}));
  CHECK_THROWS_AS(tape.add(a, b), ShapeError);
  CHECK_THROWS_AS(tape.mul(a, b), ShapeError);
  CHECK_THROWS_AS(tape.dot(a, b), ShapeError);
  NodeId m = tape.leaf(Tensor::mat(2, 2, 1.0));
  CHECK_THROWS_AS(tape.matvec(m, b), ShapeError);
  CHECK_THROWS_AS(tape.matmul(m, tape.leaf(Tensor::mat(3, 2, 1.0))), ShapeError);
  CHECK_THROWS_AS(tape.smul(a, b), ShapeError);  // first arg must be scalar
}

TEST_CASE("sigmoid stays finite and correct at extreme inputs") {
  Tape tape;
  NodeId v = tape.leaf(Tensor::vec({-800.0, 0.0, 800.0}));
  NodeId s = tape.sigmoid(v);
  CHECK(tape.value(s)[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(tape.value(s)[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(tape.value(s)[2] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(tape.value(s).all_finite());
}

TEST_CASE("first_non_finite reports the earliest offending node") {
  Tape tape;
  NodeId ok = tape.leaf(Tensor::vec({1.0, 2.0}));
  CHECK(tape.first_non_finite() == Tape::npos);
  NodeId inf = tape.leaf(Tensor::vec({std::exp(1000.0)}), "overflow");
  (void)ok;
  CHECK(tape.first_non_finite() == inf);
  CHECK(std::string(tape.op_tag(tape.first_non_finite())) == "overflow");
}

TEST_CASE("Rng streams are deterministic and state round-trips") {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  std::string saved = a.state();
  std::vector<double> want;
  for (int i = 0; i < 10; ++i) want.push_back(a.uniform());
  Rng c(0);
  c.set_state(saved);
  for (int i = 0; i < 10; ++i) CHECK(c.uniform() == want[i]);
}

TEST_CASE("Rng below and range stay in bounds") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    CHECK(rng.below(7) < 7);
    auto r = rng.range(-3, 3);
    CHECK(r >= -3);
    CHECK(r <= 3);
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("hash64 is stable and input-sensitive") {
  CHECK(hash64("abc") == hash64("abc"));
  CHECK(hash64("abc") != hash64("abd"));
  CHECK(hash64("") != hash64(" "));
}

TEST_CASE("parameter init depends on the name, not creation order") {
  ParameterStore s1(42), s2(42);
  s1.create("alpha", {3, 3});
  s1.create("beta", {3, 3});
  s2.create("beta", {3, 3});
  s2.create("alpha", {3, 3});
  CHECK(s1.get("alpha").value.data == s2.get("alpha").value.data);
  CHECK(s1.get("beta").value.data == s2.get("beta").value.data);

  ParameterStore s3(43);
  s3.create("alpha", {3, 3});
  CHECK(s1.get("alpha").value.data != s3.get("alpha").value.data);
}

TEST_CASE("xavier bounds hold for every element") {
  ParameterStore store(7);
  Param& p = store.create("w", {6, 10});
  double bound = std::sqrt(6.0 / (10 + 6));
  for (double x : p.value.data) {
    CHECK(x <= bound);
    CHECK(x >= -bound);
  }
  Param& z = store.create_zeros("b", {6});
  for (double x : z.value.data) CHECK(x == 0.0);
}

TEST_CASE("duplicate parameter names and missing lookups throw") {
  ParameterStore store(1);
  store.create("w", {2});
  CHECK_THROWS_AS(store.create("w", {2}), ConfigError);
  CHECK_THROWS_AS(store.get("nope"), LookupError);
}

}  // TEST_SUITE
