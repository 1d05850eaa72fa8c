#include "collapse/score_model.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "collapse/error.hpp"
#include "mlp_kernels.hpp"

namespace collapse {

SkipMode skip_mode_from_name(const std::string& name) {
  if (name == "none") return SkipMode::None;
  if (name == "learned") return SkipMode::Learned;
  if (name == "fixed") return SkipMode::Fixed;
  throw ParameterError(fmt::format("unknown skip mode '{}' (expected none, learned or fixed)", name));
}

std::string skip_mode_name(SkipMode mode) {
  switch (mode) {
    case SkipMode::None: return "none";
    case SkipMode::Learned: return "learned";
    case SkipMode::Fixed: return "fixed";
  }
  return "?";
}

namespace {

std::vector<int> with_ends(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> widths{in};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(out);
  return widths;
}

}  // namespace

ScoreModel ScoreModel::create(const ModelArch& arch, int data_dim, const NoiseSchedule& schedule,
                              Seed seed) {
  if (data_dim < 1) throw ParameterError("data dimension must be >= 1");
  ScoreModel model;
  model.inner = Mlp::init(with_ends(data_dim + 1, arch.hidden, data_dim), arch.activation, seed.child(0));
  model.skip = arch.skip;
  model.swap_fixed = arch.swap_fixed;
  model.schedule = schedule;
  model.precision = arch.precision;
  if (arch.skip == SkipMode::Learned) {
    model.c1 = Mlp::init(with_ends(1, arch.skip_hidden, 1), Activation::Tanh, seed.child(1));
    model.c2 = Mlp::init(with_ends(1, arch.skip_hidden, 1), Activation::Tanh, seed.child(2));
  }
  return model;
}

ModelArch ScoreModel::arch() const {
  ModelArch a;
  a.hidden.assign(inner.widths.begin() + 1, inner.widths.end() - 1);
  a.activation = inner.activation;
  a.skip = skip;
  a.swap_fixed = swap_fixed;
  if (c1) a.skip_hidden.assign(c1->widths.begin() + 1, c1->widths.end() - 1);
  a.precision = precision;
  return a;
}

ScoreModel ScoreModel::zeros_like() const {
  ScoreModel out = *this;
  out.inner = inner.zeros_like();
  if (c1) out.c1 = c1->zeros_like();
  if (c2) out.c2 = c2->zeros_like();
  return out;
}

void ScoreModel::validate() const {
  inner.validate();
  if (inner.input_dim() != inner.output_dim() + 1) {
    throw ParameterError(fmt::format("inner network maps {} -> {}; expected d+1 -> d",
                                     inner.input_dim(), inner.output_dim()));
  }
  if (skip == SkipMode::Learned) {
    if (!c1 || !c2) throw ParameterError("learned skip requires both coefficient networks");
    for (const Mlp* c : {&*c1, &*c2}) {
      c->validate();
      if (c->input_dim() != 1 || c->output_dim() != 1) {
        throw ParameterError("skip coefficient networks must map a scalar t to a scalar");
      }
    }
  } else if (c1 || c2) {
    throw ParameterError("coefficient networks present but skip mode is not learned");
  }
}

std::vector<std::span<double>> ScoreModel::parameters() {
  std::vector<std::span<double>> out;
  inner.append_parameters(out);
  if (c1) c1->append_parameters(out);
  if (c2) c2->append_parameters(out);
  return out;
}

std::vector<std::span<const double>> ScoreModel::parameters() const {
  std::vector<std::span<const double>> out;
  inner.append_parameters(out);
  if (c1) c1->append_parameters(out);
  if (c2) c2->append_parameters(out);
  return out;
}

std::size_t ScoreModel::parameter_count() const {
  std::size_t n = inner.parameter_count();
  if (c1) n += c1->parameter_count();
  if (c2) n += c2->parameter_count();
  return n;
}

namespace {

using detail::CastMlp;
using detail::Mat;

template <typename T>
struct CastModel {
  CastMlp<T> inner;
  std::optional<CastMlp<T>> c1;
  std::optional<CastMlp<T>> c2;

  explicit CastModel(const ScoreModel& m) : inner(m.inner) {
    if (m.c1) c1.emplace(*m.c1);
    if (m.c2) c2.emplace(*m.c2);
  }
};

template <typename T>
struct Tape {
  std::vector<Mat<T>> inner;
  std::vector<Mat<T>> c1;
  std::vector<Mat<T>> c2;
  Mat<T> x;        // d x B
  Mat<T> net;      // d x B
  Mat<T> coef_x;   // 1 x B
  Mat<T> coef_net; // 1 x B
};

// Column-major d x B prediction; tape is filled when non-null.
template <typename T>
Mat<T> predict(const ScoreModel& model, const CastModel<T>& cast, const Matrix& x, const Vector& t,
               Tape<T>* tape) {
  const auto d = x.cols();
  const auto b = x.rows();
  Mat<T> input(d + 1, b);
  input.topRows(d) = x.transpose().template cast<T>();
  input.row(d) = t.transpose().template cast<T>();

  Tape<T> local;
  Tape<T>& tp = tape ? *tape : local;
  tp.x = input.topRows(d);
  Mat<T> t_row = input.row(d);
  tp.net = detail::mlp_forward<T>(cast.inner, std::move(input), tape ? &tp.inner : nullptr);

  switch (model.skip) {
    case SkipMode::None:
      return tp.net;
    case SkipMode::Learned:
      tp.coef_x = detail::mlp_forward<T>(*cast.c1, t_row, tape ? &tp.c1 : nullptr);
      tp.coef_net = detail::mlp_forward<T>(*cast.c2, t_row, tape ? &tp.c2 : nullptr);
      break;
    case SkipMode::Fixed: {
      tp.coef_x.resize(1, b);
      tp.coef_net.resize(1, b);
      for (Eigen::Index i = 0; i < b; ++i) {
        const double sigma = model.schedule.sigma(t[i]);
        const double on_x = model.swap_fixed ? 1.0 - sigma : sigma;
        tp.coef_x(0, i) = static_cast<T>(on_x);
        tp.coef_net(0, i) = static_cast<T>(1.0 - on_x);
      }
      break;
    }
  }
  Mat<T> out = tp.x.array().rowwise() * tp.coef_x.row(0).array();
  out.array() += tp.net.array().rowwise() * tp.coef_net.row(0).array();
  return out;
}

template <typename T>
void backprop(const ScoreModel& model, const CastModel<T>& cast, const Tape<T>& tape,
              const Mat<T>& grad_out, ScoreModel& grads) {
  Mat<T> grad_net;
  if (model.skip == SkipMode::None) {
    grad_net = grad_out;
  } else {
    grad_net = grad_out.array().rowwise() * tape.coef_net.row(0).array();
    if (model.skip == SkipMode::Learned) {
      Mat<T> d_coef_x = (grad_out.array() * tape.x.array()).colwise().sum();
      Mat<T> d_coef_net = (grad_out.array() * tape.net.array()).colwise().sum();
      detail::mlp_backward<T>(*cast.c1, tape.c1, std::move(d_coef_x), *grads.c1, false);
      detail::mlp_backward<T>(*cast.c2, tape.c2, std::move(d_coef_net), *grads.c2, false);
    }
  }
  detail::mlp_backward<T>(cast.inner, tape.inner, std::move(grad_net), grads.inner, false);
}

void check_input(const ScoreModel& model, Eigen::Index cols, Eigen::Index rows, Eigen::Index t_rows) {
  if (cols != model.data_dim()) {
    throw ParameterError(
        fmt::format("model expects dimension {}, got {}", model.data_dim(), cols));
  }
  if (t_rows != rows) {
    throw ParameterError(fmt::format("{} points but {} times", rows, t_rows));
  }
}

template <typename T>
Matrix forward_impl(const ScoreModel& model, const Matrix& x, const Vector& t) {
  const CastModel<T> cast(model);
  Matrix out(x.rows(), x.cols());
  constexpr Eigen::Index kChunk = 4096;
  for (Eigen::Index start = 0; start < x.rows(); start += kChunk) {
    const auto len = std::min(kChunk, x.rows() - start);
    Mat<T> pred = predict<T>(model, cast, x.middleRows(start, len), t.segment(start, len), nullptr);
    out.middleRows(start, len) = pred.transpose().template cast<double>();
  }
  return out;
}

template <typename T>
LossAndGrad loss_grad_impl(const ScoreModel& model, const Matrix& x_t, const Vector& t,
                           const Matrix& eps) {
  const CastModel<T> cast(model);
  Tape<T> tape;
  Mat<T> pred = predict<T>(model, cast, x_t, t, &tape);
  const Mat<T> residual = pred - eps.transpose().template cast<T>();
  const auto b = static_cast<double>(x_t.rows());
  LossAndGrad out;
  out.loss = residual.template cast<double>().squaredNorm() / b;
  out.grads = model.zeros_like();
  backprop<T>(model, cast, tape, (T(2.0 / b) * residual).eval(), out.grads);
  return out;
}

Matrix noised(const NoiseSchedule& sched, const Matrix& x0, const Vector& t, const Matrix& eps) {
  Matrix x_t(x0.rows(), x0.cols());
  for (Eigen::Index i = 0; i < x0.rows(); ++i) {
    const auto [alpha, sigma] = sched.coeffs(t[i]);
    x_t.row(i) = alpha * x0.row(i) + sigma * eps.row(i);
  }
  return x_t;
}

}  // namespace

Matrix forward(const ScoreModel& model, const Matrix& x, const Vector& t) {
  check_input(model, x.cols(), x.rows(), t.size());
  if (model.precision == Precision::Float32) return forward_impl<float>(model, x, t);
  return forward_impl<double>(model, x, t);
}

Matrix forward(const ScoreModel& model, const Matrix& x, double t) {
  return forward(model, x, Vector::Constant(x.rows(), t));
}

Vector forward(const ScoreModel& model, const Vector& x, double t) {
  Matrix row = x.transpose();
  return forward(model, row, t).row(0).transpose();
}

Matrix forward(const TwoModel& model, const Matrix& x, double t) {
  return forward(model.route(t), x, t);
}

LossAndGrad loss_and_grad(const ScoreModel& model, const Matrix& x0, const Vector& t,
                          const Matrix& eps) {
  if (x0.rows() == 0) throw ParameterError("loss requires a nonempty batch");
  check_input(model, x0.cols(), x0.rows(), t.size());
  if (eps.rows() != x0.rows() || eps.cols() != x0.cols()) {
    throw ParameterError("noise block shape differs from batch shape");
  }
  const Matrix x_t = noised(model.schedule, x0, t, eps);
  if (model.precision == Precision::Float32) return loss_grad_impl<float>(model, x_t, t, eps);
  return loss_grad_impl<double>(model, x_t, t, eps);
}

LossAndGrad loss_and_grad(const ScoreModel& model, const Matrix& batch,
                          std::pair<double, double> t_range, Seed seed) {
  if (batch.rows() == 0) throw ParameterError("loss requires a nonempty batch");
  const auto [lo, hi] = t_range;
  if (!(lo < hi)) throw ParameterError(fmt::format("t range ({}, {}) is empty", lo, hi));
  Rng rng(seed);
  Vector t(batch.rows());
  for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  Matrix eps = rng.normal_matrix(batch.rows(), batch.cols());
  return loss_and_grad(model, batch, t, eps);
}

double dsm_loss(const ScoreModel& model, const Matrix& x0, const Vector& t, const Matrix& eps) {
  const Matrix x_t = noised(model.schedule, x0, t, eps);
  return (forward(model, x_t, t) - eps).squaredNorm() / static_cast<double>(x0.rows());
}

double eval_dsm_at(const EpsPredictor& predictor, const NoiseSchedule& sched, const Matrix& data,
                   double t, int n_mc, Seed seed) {
  if (n_mc < 1) throw ParameterError("eval_dsm_at needs n_mc >= 1");
  if (data.rows() == 0) throw ParameterError("eval_dsm_at needs a nonempty dataset");
  const auto [alpha, sigma] = sched.coeffs(t);
  double acc = 0.0;
  for (int rep = 0; rep < n_mc; ++rep) {
    Rng rng(seed.child(static_cast<std::uint64_t>(rep)));
    const Matrix eps = rng.normal_matrix(data.rows(), data.cols());
    const Matrix x_t = alpha * data + sigma * eps;
    acc += (predictor(x_t, t) - eps).squaredNorm();
  }
  return acc / (static_cast<double>(data.rows()) * n_mc);
}

double eval_dsm_at(const ScoreModel& model, const Matrix& data, double t, int n_mc, Seed seed) {
  return eval_dsm_at([&](const Matrix& x, double tt) { return forward(model, x, tt); },
                     model.schedule, data, t, n_mc, seed);
}

Matrix model_score(const ScoreModel& model, const Matrix& x, double t, double t_min) {
  if (t < t_min) {
    throw SingularityError(fmt::format("score requested at t = {} below t_min = {}", t, t_min));
  }
  const double sigma = model.schedule.sigma(t);
  if (sigma == 0.0) throw SingularityError("sigma_t = 0; score undefined");
  return -forward(model, x, t) / sigma;
}

Matrix model_velocity(const ScoreModel& model, const Matrix& x, double t, double t_min) {
  const Matrix score = model_score(model, x, t, t_min);
  return model.schedule.log_alpha_rate(t) * x - 0.5 * model.schedule.diffusion_sq(t) * score;
}

}  // namespace collapse
