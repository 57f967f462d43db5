#include <cmath>
#include <random>

#include "doctest.h"
#include "mmhdc/data_io.hpp"
#include "mmhdc/mm_hdc.hpp"

using namespace mmhdc;

namespace {

struct Toy {
  Matrix h;
  std::vector<int> y;
  PrototypePair p;
};

Toy random_toy(std::mt19937_64& rng, std::size_t n, std::size_t dim, double scale = 0.5) {
  std::normal_distribution<double> g(0.0, scale);
  Toy t{Matrix(n, dim), std::vector<int>(n), PrototypePair(dim)};
  for (auto& v : t.h.data()) v = g(rng);
  for (std::size_t i = 0; i < n; ++i) t.y[i] = (i % 2 == 0) ? 1 : -1;
  for (auto& v : t.p.plus) v = g(rng);
  for (auto& v : t.p.minus) v = g(rng);
  return t;
}

// Term-by-term objective written without any library reductions.
double naive_objective(const Toy& t, double C, Loss loss) {
  const std::size_t dim = t.p.dim();
  double wsq = 0.0;
  for (std::size_t k = 0; k < dim; ++k) wsq += (t.p.plus[k] - t.p.minus[k]) * (t.p.plus[k] - t.p.minus[k]);
  double total = std::isinf(C) ? 0.0 : wsq / (2.0 * C);
  for (std::size_t i = 0; i < t.h.rows(); ++i) {
    double m = 0.0;
    for (std::size_t k = 0; k < dim; ++k) m += t.h(i, k) * (t.p.plus[k] - t.p.minus[k]);
    const double z = std::max(0.0, 1.0 - t.y[i] * m);
    total += loss == Loss::hinge ? z : z * z;
  }
  return total;
}

double min_abs_slack(const Toy& t) {
  const Vector w = t.p.hyperplane();
  double best = 1e300;
  for (std::size_t i = 0; i < t.h.rows(); ++i) best = std::min(best, std::abs(1.0 - t.y[i] * dot(t.h.row(i), w)));
  return best;
}

double fd_relative_error(const Toy& t, double C, Loss loss) {
  const Gradient g = gradients(t.p, t.h, t.y, C, loss);
  const double step = 1e-6;
  double num = 0.0, den = 0.0;
  for (int side = 0; side < 2; ++side) {
    for (std::size_t k = 0; k < t.p.dim(); ++k) {
      Toy a = t, b = t;
      (side == 0 ? a.p.plus : a.p.minus)[k] += step;
      (side == 0 ? b.p.plus : b.p.minus)[k] -= step;
      const double fd = (naive_objective(a, C, loss) - naive_objective(b, C, loss)) / (2 * step);
      const double an = (side == 0 ? g.plus : g.minus)[k];
      num += (fd - an) * (fd - an);
      den += fd * fd;
    }
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

}  // namespace

TEST_CASE("violation_sets boundary cases") {
  Matrix h(3, 1);
  h(0, 0) = 0.5;
  h(1, 0) = 1.5;
  h(2, 0) = -1.0;
  const std::vector<int> y{1, 1, -1};
  const PrototypePair p(Vector{1.0}, Vector{0.0});
  const ViolationSets s = violation_sets(p, h, y);
  CHECK(s.plus == std::vector<std::size_t>{0});
  CHECK(s.minus.empty());

  Matrix neg(1, 1, -1.0);
  CHECK(violation_sets(p, neg, std::vector<int>{-1}).minus.empty());
}

TEST_CASE("removing a violator lowers the hinge sum") {
  std::mt19937_64 rng(14);
  const Toy t = random_toy(rng, 12, 5);
  const ViolationSets s = violation_sets(t.p, t.h, t.y);
  const double full = objective(t.p, t.h, t.y, 10.0, Loss::hinge).hinge_sum;
  std::vector<std::size_t> viol(s.plus);
  viol.insert(viol.end(), s.minus.begin(), s.minus.end());
  REQUIRE_FALSE(viol.empty());
  for (std::size_t drop : viol) {
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < 12; ++i)
      if (i != drop) rest.push_back(i);
    CHECK(objective(t.p, t.h, t.y, rest, 10.0, Loss::hinge).hinge_sum < full);
  }
}

TEST_CASE("objective examples") {
  Matrix h(3, 2, 0.3);
  const std::vector<int> y{1, -1, 1};
  const PrototypePair same(Vector{1, 2}, Vector{1, 2});
  CHECK(objective(same, h, y, 1.0, Loss::hinge).objective == 3.0);

  Matrix far(2, 2);
  far(0, 0) = 2;
  far(1, 0) = -2;
  const PrototypePair p(Vector{1, 0}, Vector{0, 0});
  const LossReport r = objective(p, far, std::vector<int>{1, -1}, 4.0, Loss::hinge);
  CHECK(r.hinge_sum == 0.0);
  CHECK(r.objective == 1.0 / 8.0);
  CHECK(objective(p, far, std::vector<int>{1, -1}, kInfinity, Loss::hinge).objective == 0.0);
}

TEST_CASE("objective matches a naive re-summation") {
  std::mt19937_64 rng(6);
  for (Loss loss : {Loss::hinge, Loss::squared_hinge}) {
    const Toy t = random_toy(rng, 6, 9);
    const LossReport r = objective(t.p, t.h, t.y, 3.0, loss);
    CHECK(r.objective == doctest::Approx(naive_objective(t, 3.0, loss)).epsilon(1e-12));
    CHECK(r.objective == r.regularizer + r.hinge_sum);
    for (double z : r.slack) CHECK(z >= 0.0);
  }
}

TEST_CASE("gradient special cases") {
  Matrix h(1, 3);
  h(0, 0) = 0.2;
  h(0, 1) = -0.4;
  h(0, 2) = 0.1;
  const PrototypePair zero(3);
  const Gradient g = gradients(zero, h, std::vector<int>{1}, kInfinity, Loss::hinge);
  CHECK(g.plus == Vector{-0.2, 0.4, -0.1});
  CHECK(g.minus == Vector{0.2, -0.4, 0.1});

  const PrototypePair wide(Vector{100, 0, 0}, Vector{0, 0, 0});
  const Gradient none = gradients(wide, h, std::vector<int>{1}, kInfinity, Loss::hinge);
  for (double v : none.plus) CHECK(v == 0.0);
  for (double v : none.minus) CHECK(v == 0.0);
}

TEST_CASE("gradients match finite differences") {
  std::mt19937_64 rng(31);
  for (Loss loss : {Loss::hinge, Loss::squared_hinge}) {
    int done = 0;
    while (done < 10) {
      const Toy t = random_toy(rng, 8, 6);
      if (min_abs_slack(t) < 1e-3) continue;
      CHECK(fd_relative_error(t, 10.0, loss) <= 1e-5);
      ++done;
    }
  }
}

TEST_CASE("gradient antisymmetry is exact") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const Toy t = random_toy(rng, 7, 11);
    for (Loss loss : {Loss::hinge, Loss::squared_hinge}) {
      const Gradient g = gradients(t.p, t.h, t.y, 0.7, loss);
      for (std::size_t k = 0; k < 11; ++k) REQUIRE(g.minus[k] == -g.plus[k]);
    }
  }
}

TEST_CASE("train_step with zero gradient is the identity") {
  Matrix h(1, 2);
  h(0, 0) = 1;
  const PrototypePair wide(Vector{5, 0}, Vector{0, 0});
  PrototypePair p = wide;
  MarginConfig cfg;
  cfg.C = kInfinity;
  cfg.lr = 0.1;
  train_step(p, h, std::vector<int>{1}, all_rows(1), cfg);
  CHECK(p == wide);
}

TEST_CASE("infinite C step equals summed perceptron updates") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 16, dim = 12;
    PrototypePair p(dim);
    for (auto& v : p.plus) v = g(rng);
    for (auto& v : p.minus) v = g(rng);
    const Vector w = p.hyperplane();
    Matrix h(n, dim);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (;;) {
        for (auto& v : h.row(i)) v = g(rng);
        y[i] = (i % 2 == 0) ? 1 : -1;
        const double m = y[i] * dot(h.row(i), w);
        if (m < 0.0 || m >= 1.0) break;
      }
    }
    const double lr = 0.01;
    Vector acc_plus(dim, 0.0), acc_minus(dim, 0.0);
    std::size_t mistakes = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (predict_binary(p, h.row(i), Similarity::dot) == y[i]) continue;
      ++mistakes;
      Vector& acc = y[i] == 1 ? acc_plus : acc_minus;
      for (std::size_t k = 0; k < dim; ++k) acc[k] += h(i, k);
    }
    REQUIRE(mistakes > 0);
    PrototypePair expected = p;
    for (std::size_t k = 0; k < dim; ++k) {
      const double d = acc_plus[k] - acc_minus[k];
      expected.plus[k] += lr * d;
      expected.minus[k] -= lr * d;
    }
    MarginConfig cfg;
    cfg.C = kInfinity;
    cfg.lr = lr;
    train_step(p, h, y, all_rows(n), cfg);
    CHECK(p == expected);
  }
}

TEST_CASE("objective does not increase with a small step") {
  std::mt19937_64 rng(4);
  for (Loss loss : {Loss::hinge, Loss::squared_hinge}) {
    Toy t = random_toy(rng, 20, 8);
    t.p = init_prototypes(t.h, t.y);
    MarginConfig cfg;
    cfg.C = 10.0;
    cfg.lr = 1e-4;
    cfg.loss = loss;
    double prev = objective(t.p, t.h, t.y, cfg.C, loss).objective;
    for (int s = 0; s < 100; ++s) {
      train_step(t.p, t.h, t.y, all_rows(20), cfg);
      const double cur = objective(t.p, t.h, t.y, cfg.C, loss).objective;
      REQUIRE(cur <= prev + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("cosine mode keeps equal prototype norms") {
  std::mt19937_64 rng(10);
  Toy t = random_toy(rng, 30, 10);
  MarginConfig cfg;
  cfg.similarity = Similarity::cosine;
  cfg.lr = 0.05;
  cfg.batch_size = 7;
  MarginTrainer trainer(cfg, t.p);
  for (int e = 0; e < 5; ++e) {
    trainer.run_epoch(t.h, t.y, all_rows(30));
    CHECK(std::abs(norm(trainer.prototypes().plus) - norm(trainer.prototypes().minus)) <= 1e-9);
  }
}

TEST_CASE("non-finite updates abort") {
  Matrix h(1, 2, 1e300);
  PrototypePair p(2);
  const PrototypePair before = p;
  MarginConfig cfg;
  cfg.lr = 1e300;
  CHECK_THROWS_AS(train_step(p, h, std::vector<int>{1}, all_rows(1), cfg), NumericalError);
  CHECK(p == before);
}

TEST_CASE("adam path needs state") {
  Matrix h(1, 1, 1.0);
  PrototypePair p(1);
  MarginConfig cfg;
  cfg.optimizer = Optimizer::adam;
  CHECK_THROWS(train_step(p, h, std::vector<int>{1}, all_rows(1), cfg));
  PairAdamState st;
  train_step(p, h, std::vector<int>{1}, all_rows(1), cfg, &st);
  CHECK(p.plus[0] == doctest::Approx(cfg.lr));
}

TEST_CASE("fit separates a separable set") {
  const SeparableSet s = make_separable(40, 6, 3.0, 9);
  MarginConfig cfg;
  cfg.C = 500;
  cfg.lr = 1e-2;
  cfg.batch_size = 16;
  cfg.epochs = 50;
  const FitResult from_zero = fit(s.data.points, s.data.labels, cfg, PrototypePair(6));
  CHECK(from_zero.trace.back().train_accuracy == 1.0);
  const FitResult from_means = fit(s.data.points, s.data.labels, cfg);
  CHECK(from_means.trace.back().train_accuracy == 1.0);
  CHECK(from_means.trace.size() == 50);
}

TEST_CASE("fit with zero epochs returns the init") {
  std::mt19937_64 rng(1);
  const Toy t = random_toy(rng, 10, 4);
  MarginConfig cfg;
  cfg.epochs = 0;
  const FitResult r = fit(t.h, t.y, cfg, t.p);
  CHECK(r.prototypes == t.p);
  CHECK(r.trace.empty());
}

TEST_CASE("fit is deterministic") {
  std::mt19937_64 rng(5);
  const Toy t = random_toy(rng, 50, 8);
  MarginConfig cfg;
  cfg.lr = 1e-2;
  cfg.batch_size = 8;
  cfg.epochs = 6;
  cfg.seed = 123;
  const FitResult a = fit(t.h, t.y, cfg);
  const FitResult b = fit(t.h, t.y, cfg);
  CHECK(a.prototypes == b.prototypes);
  for (std::size_t e = 0; e < a.trace.size(); ++e) CHECK(a.trace[e].objective == b.trace[e].objective);
}

TEST_CASE("config validation") {
  MarginConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.C = 0;
  CHECK_THROWS(cfg.validate());
  cfg.C = 1;
  cfg.lr = -1;
  CHECK_THROWS(cfg.validate());
  cfg.lr = 1;
  cfg.batch_size = 0;
  CHECK_THROWS(cfg.validate());
  CHECK(parse_loss("sq-hinge") == Loss::squared_hinge);
  CHECK_THROWS(parse_loss("logistic"));
}
