#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "doctest.h"
#include "deckmotion/lstm.hpp"
#include "deckmotion/rng.hpp"
#include "oracles.hpp"

using namespace deckmotion;

namespace {

LstmConfig shape(int hidden, int lookback) {
  LstmConfig c;
  c.hidden_dim = hidden;
  c.lookback = lookback;
  return c;
}

LstmParams random_params(const LstmConfig& c, std::uint64_t seed, double scale) {
  LstmParams p(c);
  Rng rng(seed);
  for (double& v : p.flat()) v = rng.uniform(-scale, scale);
  return p;
}

std::vector<double> random_window(Rng& rng, int lookback, double scale = 1.5) {
  std::vector<double> w(static_cast<std::size_t>(lookback) * 3);
  for (double& v : w) v = rng.uniform(-scale, scale);
  return w;
}

}  // namespace

TEST_CASE("init_params") {
  const LstmConfig c8 = shape(8, 40);
  const LstmParams a = init_params(c8, 123);
  CHECK(a == init_params(c8, 123));
  CHECK_FALSE(a == init_params(c8, 124));
  CHECK(a.size() == LstmParams::count_for(8));
  for (int r = 0; r < 8; ++r) {
    CHECK(a.gate_bias(Gate::forget)(r) == 1.0);
    CHECK(a.gate_bias(Gate::input)(r) == 0.0);
    CHECK(a.gate_bias(Gate::candidate)(r) == 0.0);
    CHECK(a.gate_bias(Gate::output)(r) == 0.0);
  }
  CHECK(a.head_bias().isZero(0.0));

  const LstmParams b = init_params(shape(64, 40), 7);
  CHECK(b.input_weights().cwiseAbs().maxCoeff() < 0.125);
  CHECK(b.recurrent_weights().cwiseAbs().maxCoeff() < 0.125);
  CHECK(b.head_weights().cwiseAbs().maxCoeff() < 0.125);
}

TEST_CASE("invalid configs") {
  LstmConfig c;
  c.input_dim = 4;
  CHECK_THROWS_AS(LstmParams{c}, std::invalid_argument);
  c = shape(0, 40);
  CHECK_THROWS_AS(LstmParams{c}, std::invalid_argument);
}

TEST_CASE("cell_forward") {
  SUBCASE("zero params") {
    const LstmParams z(shape(5, 3));
    const LstmState s = cell_forward(z, {0.3, -2.0, 7.0}, LstmState::zeros(5));
    CHECK(s.h.isZero(0.0));
    CHECK(s.c.isZero(0.0));
  }

  SUBCASE("matches scalar-loop oracle") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
      const int H = 1 + static_cast<int>(rng.below(8));
      const LstmParams p = random_params(shape(H, 1), 100 + trial, 0.5);
      LstmState st{Eigen::VectorXd(H), Eigen::VectorXd(H)};
      oracle::ScalarState<double> os{std::vector<double>(H), std::vector<double>(H)};
      for (int r = 0; r < H; ++r) {
        os.h[r] = st.h(r) = rng.uniform(-0.9, 0.9);
        os.c[r] = st.c(r) = rng.uniform(-2, 2);
      }
      const Motion x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const LstmState got = cell_forward(p, x, st);
      const auto want = oracle::ScalarNet<double>{p}.step(x, os);
      for (int r = 0; r < H; ++r) {
        CHECK(std::abs(got.h(r) - want.h[r]) <= 1e-12);
        CHECK(std::abs(got.c(r) - want.c[r]) <= 1e-12);
      }
    }
  }

  SUBCASE("hidden activation bound") {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
      const LstmParams p = random_params(shape(6, 1), 500 + trial, 5.0);
      LstmState s = LstmState::zeros(6);
      for (int step = 0; step < 20; ++step) {
        s = cell_forward(p, {rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-50, 50)}, s);
        CHECK(s.h.cwiseAbs().maxCoeff() <= 1.0);
        CHECK(s.c.allFinite());
      }
    }
  }
}

TEST_CASE("forward_window") {
  Rng rng(9);

  SUBCASE("zero network returns the head bias") {
    LstmParams p(shape(4, 6));
    p.head_bias() << 0.25, -1.5, 3.0;
    const Motion y = forward_window(p, random_window(rng, 6));
    CHECK(y == Motion{0.25, -1.5, 3.0});
  }

  SUBCASE("pure and matches transcript oracle") {
    for (int trial = 0; trial < 10; ++trial) {
      const LstmConfig c = shape(1 + static_cast<int>(rng.below(8)), 1 + static_cast<int>(rng.below(12)));
      const LstmParams p = random_params(c, 900 + trial, 0.6);
      const auto w = random_window(rng, c.lookback);
      const Motion y1 = forward_window(p, w);
      CHECK(y1 == forward_window(p, w));

      const auto [states, out] = oracle::ScalarNet<double>{p}.run(w);
      CHECK(states.size() == static_cast<std::size_t>(c.lookback));
      for (int k = 0; k < 3; ++k) CHECK(std::abs(y1[k] - out[k]) <= 1e-12);

      // Intermediate states agree with stepping cell_forward by hand.
      LstmState s = LstmState::zeros(c.hidden_dim);
      for (int t = 0; t < c.lookback; ++t) {
        s = cell_forward(p, {w[3 * t], w[3 * t + 1], w[3 * t + 2]}, s);
        for (int r = 0; r < c.hidden_dim; ++r)
          CHECK(std::abs(s.h(r) - states[t].h[r]) <= 1e-12);
      }
    }
  }

  SUBCASE("wrong window shape") {
    const LstmParams p(shape(3, 5));
    std::vector<double> w(14);
    CHECK_THROWS_AS(forward_window(p, w), std::invalid_argument);
    w.resize(18);
    CHECK_THROWS_AS(forward_window(p, w), std::invalid_argument);
  }

  SUBCASE("head rows are independent") {
    const LstmConfig c = shape(6, 8);
    LstmParams p = random_params(c, 77, 0.5);
    const auto w = random_window(rng, 8);
    const Motion before = forward_window(p, w);
    p.head_weights().row(1).array() += 0.3;
    const Motion after = forward_window(p, w);
    CHECK(after[0] == before[0]);
    CHECK(after[2] == before[2]);
    CHECK(after[1] != before[1]);
  }
}

TEST_CASE("loss_and_gradients") {
  Rng rng(31);

  SUBCASE("targets equal predictions") {
    const LstmConfig c = shape(5, 7);
    const LstmParams p = random_params(c, 3, 0.4);
    std::vector<std::vector<double>> windows;
    std::vector<Example> batch;
    for (int k = 0; k < 4; ++k) windows.push_back(random_window(rng, 7));
    for (const auto& w : windows) batch.push_back({w, forward_window(p, w)});
    const auto r = loss_and_gradients(p, batch);
    CHECK(r.loss == 0.0);
    for (double g : r.grads.flat()) CHECK(g == 0.0);
  }

  SUBCASE("finite-difference check, hidden 4, lookback 5") {
    const LstmConfig c = shape(4, 5);
    const LstmParams p = random_params(c, 8, 0.7);
    std::vector<std::vector<double>> windows{random_window(rng, 5)};
    std::vector<Motion> targets{{0.5, -0.2, 0.9}};
    const std::vector<Example> batch{{windows[0], targets[0]}};
    const auto r = loss_and_gradients(p, batch);
    const auto fd = oracle::fd_gradient(p, windows, targets, 1e-5);
    double worst = 0.0;
    for (std::size_t j = 0; j < fd.size(); ++j)
      worst = std::max(worst, oracle::rel_error(r.grads.flat()[j], fd[j]));
    CHECK(worst < 1e-5);
    CHECK(r.loss == doctest::Approx(batch_loss(p, batch)).epsilon(1e-14));
  }

  SUBCASE("duplicated batch") {
    const LstmConfig c = shape(3, 4);
    const LstmParams p = random_params(c, 12, 0.5);
    std::vector<std::vector<double>> windows;
    for (int k = 0; k < 3; ++k) windows.push_back(random_window(rng, 4));
    std::vector<Example> batch, twice;
    for (const auto& w : windows) batch.push_back({w, {0.1, 0.2, 0.3}});
    twice = batch;
    twice.insert(twice.end(), batch.begin(), batch.end());
    const auto a = loss_and_gradients(p, batch);
    const auto b = loss_and_gradients(p, twice);
    CHECK(b.loss == doctest::Approx(a.loss).epsilon(1e-14));
    for (std::size_t j = 0; j < a.grads.size(); ++j)
      CHECK(b.grads.flat()[j] == doctest::Approx(a.grads.flat()[j]).epsilon(1e-12).scale(1e-12));
  }

  SUBCASE("parallel kernel equals serial reference bitwise") {
    const LstmConfig c = shape(16, 12);
    const LstmParams p = random_params(c, 44, 0.3);
    std::vector<std::vector<double>> windows;
    std::vector<Example> batch;
    for (int k = 0; k < 37; ++k) windows.push_back(random_window(rng, 12));
    for (const auto& w : windows) batch.push_back({w, {rng.uniform(-1, 1), 0.0, 0.5}});
    const auto ser = loss_and_gradients_serial(p, batch);
    for (int threads : {1, 3, 4}) {
#ifdef _OPENMP
      const int saved = omp_get_max_threads();
      omp_set_num_threads(threads);
#endif
      const auto par = loss_and_gradients(p, batch);
#ifdef _OPENMP
      omp_set_num_threads(saved);
#endif
      CAPTURE(threads);
      CHECK(par.loss == ser.loss);
      CHECK(par.grads == ser.grads);
    }

    GradientKernel kernel(c);
    Gradients out;
    const double l1 = kernel.compute(p, batch, out);
    const Gradients first = out;
    const double l2 = kernel.compute(p, batch, out);
    CHECK(l1 == l2);
    CHECK(first == out);
  }

  SUBCASE("stateless windows") {
    const LstmConfig c = shape(5, 6);
    const LstmParams p = random_params(c, 2, 0.5);
    const auto w1 = random_window(rng, 6);
    const auto w2 = random_window(rng, 6);
    const std::vector<Example> first{{w1, {1, 1, 1}}};
    const std::vector<Example> solo{{w2, {0, 0, 0}}};
    GradientKernel kernel(c);
    Gradients g;
    kernel.compute(p, first, g);
    const double after = kernel.compute(p, solo, g);
    const auto fresh = loss_and_gradients(p, solo);
    CHECK(after == fresh.loss);
    CHECK(g == fresh.grads);
    const Motion y = forward_window(p, w2);
    CHECK(after == doctest::Approx((y[0] * y[0] + y[1] * y[1] + y[2] * y[2]) / 3.0).epsilon(1e-14));
  }

  SUBCASE("independent of buffer alignment") {
    const LstmConfig c = shape(7, 9);
    const LstmParams p = random_params(c, 5, 0.5);
    const auto w = random_window(rng, 9);
    const auto ref = loss_and_gradients(p, std::vector<Example>{{w, {0.3, 0.1, -0.2}}});
    for (std::size_t shift = 1; shift < 8; ++shift) {
      std::vector<double> buf(shift, 0.0);
      buf.insert(buf.end(), w.begin(), w.end());
      const std::span<const double> moved(buf.data() + shift, w.size());
      CHECK(forward_window(p, moved) == forward_window(p, w));
      const auto r = loss_and_gradients(p, std::vector<Example>{{moved, {0.3, 0.1, -0.2}}});
      CHECK(r.loss == ref.loss);
      CHECK(r.grads == ref.grads);
    }
  }

  SUBCASE("errors") {
    const LstmParams p(shape(3, 4));
    CHECK_THROWS_AS(loss_and_gradients(p, {}), std::invalid_argument);
    std::vector<double> bad(5);
    const std::vector<Example> batch{{bad, {0, 0, 0}}};
    CHECK_THROWS_AS(loss_and_gradients(p, batch), std::invalid_argument);
  }
}
