#include "deckmotion/lstm.hpp"

#include <cmath>
#include <string>

#include "deckmotion/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace deckmotion {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using RowWindow = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>>;

void LstmConfig::validate() const {
  if (input_dim != 3 || output_dim != 3)
    throw std::invalid_argument("composite network needs input_dim = output_dim = 3");
  if (hidden_dim < 1) throw std::invalid_argument("hidden_dim must be positive");
  if (lookback < 1) throw std::invalid_argument("lookback must be positive");
}

LstmParams::LstmParams(const LstmConfig& config) : config_(config) {
  config_.validate();
  data_.assign(count_for(config_.hidden_dim), 0.0);
}

std::size_t LstmParams::count_for(int hidden_dim) {
  const auto h = static_cast<std::size_t>(hidden_dim);
  return 12 * h + 4 * h * h + 4 * h + 3 * h + 3;
}

bool LstmParams::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

LstmParams init_params(const LstmConfig& config, std::uint64_t seed) {
  LstmParams p(config);
  const double s = 1.0 / std::sqrt(static_cast<double>(config.hidden_dim));
  Rng rng(seed);
  auto fill = [&](auto&& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-s, s);
  };
  fill(p.input_weights());
  fill(p.recurrent_weights());
  fill(p.head_weights());
  p.gate_bias(Gate::forget).setOnes();
  return p;
}

namespace {

inline void sigmoid_inplace(Eigen::Ref<VectorXd> v) {
  v = (1.0 + (-v.array()).exp()).inverse();
}

// One recurrence step. `pre` holds W x + b for this step; writes activated
// gates (i, f, g, o stacked), the new cell, tanh of the new cell, and h.
void lstm_step(const LstmParams& p, const Eigen::Ref<const VectorXd>& pre,
               const Eigen::Ref<const VectorXd>& h_prev, const Eigen::Ref<const VectorXd>& c_prev,
               Eigen::Ref<VectorXd> gates, Eigen::Ref<VectorXd> c, Eigen::Ref<VectorXd> tanh_c,
               Eigen::Ref<VectorXd> h) {
  const int H = p.hidden();
  gates.noalias() = pre;
  gates.noalias() += p.recurrent_weights() * h_prev;
  sigmoid_inplace(gates.segment(0, 2 * H));
  gates.segment(2 * H, H) = gates.segment(2 * H, H).array().tanh();
  sigmoid_inplace(gates.segment(3 * H, H));
  c = gates.segment(H, H).cwiseProduct(c_prev) + gates.segment(0, H).cwiseProduct(gates.segment(2 * H, H));
  tanh_c = c.array().tanh();
  h = gates.segment(3 * H, H).cwiseProduct(tanh_c);
}

// Activations retained for the backward pass of one window.
struct Workspace {
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> x;  // L x 3 copy of the window
  MatrixXd pre;     // 4H x L, W x_t + b
  MatrixXd gates;   // 4H x L
  MatrixXd cells;   // H x (L+1), column 0 is the zero initial cell
  MatrixXd hidden;  // H x (L+1), column 0 is the zero initial h
  MatrixXd tanh_c;  // H x L
  MatrixXd dz;      // 4H x L, gradient w.r.t. gate pre-activations
  VectorXd dh, dc, dh_next, dc_next;

  void resize(int H, int L) {
    x.resize(L, 3);
    pre.resize(4 * H, L);
    gates.resize(4 * H, L);
    cells.resize(H, L + 1);
    hidden.resize(H, L + 1);
    tanh_c.resize(H, L);
    dz.resize(4 * H, L);
    dh.resize(H);
    dc.resize(H);
    dh_next.resize(H);
    dc_next.resize(H);
  }
};

void check_window(const LstmParams& p, std::span<const double> window) {
  const auto expected = static_cast<std::size_t>(p.config().lookback) * 3;
  if (window.size() != expected)
    throw std::invalid_argument("window has " + std::to_string(window.size()) +
                                " values, expected lookback*3 = " + std::to_string(expected));
}

Motion forward_into(const LstmParams& p, std::span<const double> window, Workspace& ws) {
  const int L = p.config().lookback;
  ws.x = RowWindow(window.data(), L, 3);
  ws.pre.noalias() = p.input_weights() * ws.x.transpose();
  ws.pre.colwise() += p.bias();
  ws.cells.col(0).setZero();
  ws.hidden.col(0).setZero();
  for (int t = 0; t < L; ++t) {
    lstm_step(p, ws.pre.col(t), ws.hidden.col(t), ws.cells.col(t), ws.gates.col(t),
              ws.cells.col(t + 1), ws.tanh_c.col(t), ws.hidden.col(t + 1));
  }
  Eigen::Vector3d y = p.head_weights() * ws.hidden.col(L) + p.head_bias();
  return {y(0), y(1), y(2)};
}

// Sum of squared errors for one window and its gradient, written (not
// accumulated) into `grad`.
double window_gradient(const LstmParams& p, const Example& ex, Workspace& ws, Gradients& grad) {
  const int H = p.hidden();
  const int L = p.config().lookback;
  const Motion y = forward_into(p, ex.window, ws);

  Eigen::Vector3d dy;
  double sse = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double e = y[k] - ex.target[k];
    sse += e * e;
    dy(k) = 2.0 * e;
  }

  grad.head_weights().noalias() = dy * ws.hidden.col(L).transpose();
  grad.head_bias() = dy;

  ws.dh.noalias() = p.head_weights().transpose() * dy;
  ws.dc.setZero();
  for (int t = L - 1; t >= 0; --t) {
    const auto i = ws.gates.col(t).segment(0, H);
    const auto f = ws.gates.col(t).segment(H, H);
    const auto g = ws.gates.col(t).segment(2 * H, H);
    const auto o = ws.gates.col(t).segment(3 * H, H);
    const auto tc = ws.tanh_c.col(t);

    ws.dc.array() += ws.dh.array() * o.array() * (1.0 - tc.array().square());
    auto dz = ws.dz.col(t);
    dz.segment(0, H) = ws.dc.array() * g.array() * i.array() * (1.0 - i.array());
    dz.segment(H, H) = ws.dc.array() * ws.cells.col(t).array() * f.array() * (1.0 - f.array());
    dz.segment(2 * H, H) = ws.dc.array() * i.array() * (1.0 - g.array().square());
    dz.segment(3 * H, H) = ws.dh.array() * tc.array() * o.array() * (1.0 - o.array());

    ws.dc_next = ws.dc.cwiseProduct(f);
    ws.dh_next.noalias() = p.recurrent_weights().transpose() * dz;
    ws.dc.swap(ws.dc_next);
    ws.dh.swap(ws.dh_next);
  }

  grad.input_weights().noalias() = ws.dz * ws.x;
  grad.recurrent_weights().noalias() = ws.dz * ws.hidden.leftCols(L).transpose();
  grad.bias() = ws.dz.rowwise().sum();
  return sse;
}

}  // namespace

LstmState cell_forward(const LstmParams& p, const Motion& x, const LstmState& state) {
  const int H = p.hidden();
  const Eigen::Vector3d xv(x[0], x[1], x[2]);
  VectorXd pre = p.input_weights() * xv + p.bias();
  VectorXd gates(4 * H), tanh_c(H);
  LstmState next{VectorXd(H), VectorXd(H)};
  lstm_step(p, pre, state.h, state.c, gates, next.c, tanh_c, next.h);
  return next;
}

Motion forward_window(const LstmParams& params, std::span<const double> window) {
  check_window(params, window);
  Workspace ws;
  ws.resize(params.hidden(), params.config().lookback);
  return forward_into(params, window, ws);
}

double batch_loss(const LstmParams& params, std::span<const Example> batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  Workspace ws;
  ws.resize(params.hidden(), params.config().lookback);
  double sse = 0.0;
  for (const Example& ex : batch) {
    check_window(params, ex.window);
    const Motion y = forward_into(params, ex.window, ws);
    for (int k = 0; k < 3; ++k) sse += (y[k] - ex.target[k]) * (y[k] - ex.target[k]);
  }
  return sse / (3.0 * static_cast<double>(batch.size()));
}

struct GradientKernel::Impl {
  LstmConfig config;
  std::vector<Workspace> workspaces;  // one per thread
  std::vector<Gradients> per_example;
  std::vector<double> sse;

  void prepare(const LstmParams& p, std::span<const Example> batch, Gradients& out,
               int threads) {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    if (!(p.config() == config)) throw std::invalid_argument("kernel built for another shape");
    for (const Example& ex : batch) check_window(p, ex.window);
    if (workspaces.size() < static_cast<std::size_t>(threads)) {
      workspaces.resize(threads);
      for (auto& ws : workspaces) ws.resize(config.hidden_dim, config.lookback);
    }
    while (per_example.size() < batch.size()) per_example.emplace_back(config);
    sse.assign(batch.size(), 0.0);
    if (!(out.config() == config) || out.size() != p.size()) out = Gradients(config);
  }

  // Element-wise sum over examples in index order, then scale.
  double reduce(std::size_t n, Gradients& out, bool parallel) {
    const double inv = 1.0 / (3.0 * static_cast<double>(n));
    auto dst = out.flat();
    const auto len = static_cast<std::ptrdiff_t>(dst.size());
#pragma omp parallel for schedule(static) if (parallel)
    for (std::ptrdiff_t j = 0; j < len; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += per_example[k].flat()[j];
      dst[j] = acc * inv;
    }
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) total += sse[k];
    return total * inv;
  }
};

namespace {

int thread_budget() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int thread_id() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

}  // namespace

GradientKernel::GradientKernel(const LstmConfig& config) : impl_(std::make_unique<Impl>()) {
  config.validate();
  impl_->config = config;
}

GradientKernel::~GradientKernel() = default;
GradientKernel::GradientKernel(GradientKernel&&) noexcept = default;
GradientKernel& GradientKernel::operator=(GradientKernel&&) noexcept = default;

double GradientKernel::compute(const LstmParams& params, std::span<const Example> batch,
                               Gradients& out) {
  impl_->prepare(params, batch, out, thread_budget());
  const auto n = static_cast<std::ptrdiff_t>(batch.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    impl_->sse[k] =
        window_gradient(params, batch[k], impl_->workspaces[thread_id()], impl_->per_example[k]);
  }
  return impl_->reduce(batch.size(), out, true);
}

double GradientKernel::compute_serial(const LstmParams& params, std::span<const Example> batch,
                                      Gradients& out) {
  impl_->prepare(params, batch, out, 1);
  for (std::size_t k = 0; k < batch.size(); ++k)
    impl_->sse[k] = window_gradient(params, batch[k], impl_->workspaces[0], impl_->per_example[k]);
  return impl_->reduce(batch.size(), out, false);
}

LossAndGradients loss_and_gradients(const LstmParams& params, std::span<const Example> batch) {
  GradientKernel kernel(params.config());
  LossAndGradients r;
  r.loss = kernel.compute(params, batch, r.grads);
  return r;
}

LossAndGradients loss_and_gradients_serial(const LstmParams& params,
                                           std::span<const Example> batch) {
  GradientKernel kernel(params.config());
  LossAndGradients r;
  r.loss = kernel.compute_serial(params, batch, r.grads);
  return r;
}

}  // namespace deckmotion
