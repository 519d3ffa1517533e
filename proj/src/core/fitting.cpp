// Copyright 2026 The faceflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/fitting.hpp"

#include "core/errors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace faceflow {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void check_same_dims(const MorphableBasis& basis, const ModelParams& a,
                     const ModelParams& b) {
  if (a.alpha_id.size() != b.alpha_id.size() ||
      a.alpha_exp.size() != b.alpha_exp.size()) {
    throw ShapeError("parameter dimensions disagree");
  }
  if (a.alpha_id.size() != basis.id_dim() ||
      a.alpha_exp.size() != basis.exp_dim()) {
    throw ShapeError("parameters do not match basis dimensions");
  }
}

} // namespace

FitConfig FitConfig::defaults() {
  FitConfig cfg;
  cfg.landmark_weights = Eigen::VectorXd::Ones(kLandmarkCount);
  for (int i = 36; i <= 47; ++i) cfg.landmark_weights[i] = 5.0;  // eyes
  for (int i = 48; i <= 67; ++i) cfg.landmark_weights[i] = 10.0; // mouth
  return cfg;
}

void FitConfig::validate() const {
  if (max_iterations < 1) throw InvalidParameterError("max_iterations must be >= 1");
  if (!(step_size > 0.0)) throw InvalidParameterError("step_size must be > 0");
  if (!(convergence_tol > 0.0)) throw InvalidParameterError("convergence_tol must be > 0");
  if (!(huber_delta > 0.0)) throw InvalidParameterError("huber_delta must be > 0");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !(lambda3 >= 0.0)) {
    throw InvalidParameterError("loss weights must be >= 0");
  }
  if (landmark_weights.size() != kLandmarkCount) {
    throw ShapeError("landmark_weights must have 68 entries");
  }
  for (Eigen::Index i = 0; i < landmark_weights.size(); ++i) {
    if (!(landmark_weights[i] > 0.0) || !std::isfinite(landmark_weights[i])) {
      throw InvalidParameterError("landmark weights must be finite and > 0");
    }
  }
}

double huber(double e, double delta) {
  const double a = std::abs(e);
  if (a <= delta) return e * e / (2.0 * delta);
  return a - delta / 2.0;
}

double huber_derivative(double e, double delta) {
  if (std::abs(e) <= delta) return e / delta;
  return sign(e);
}

double loss_landmark(const MorphableBasis& basis, const ModelParams& params,
                     const LandmarkSet& target, double huber_delta) {
  target.validate();
  if (!(huber_delta > 0.0)) throw InvalidParameterError("huber_delta must be > 0");
  const LandmarkSet pred = landmarks_2d(basis, params);
  double acc = 0.0;
  for (int i = 0; i < kLandmarkCount; ++i) {
    const double ex = pred.points(i, 0) - target.points(i, 0);
    const double ey = pred.points(i, 1) - target.points(i, 1);
    acc += target.weights[i] * (huber(ex, huber_delta) + huber(ey, huber_delta));
  }
  return acc / static_cast<double>(kLandmarkCount);
}

double loss_shape(const MorphableBasis& basis, const ModelParams& params,
                  const ModelParams& gt) {
  basis.validate();
  check_same_dims(basis, params, gt);
  const Eigen::VectorXd diff =
      basis.id_basis * (params.alpha_id - gt.alpha_id) +
      basis.exp_basis * (params.alpha_exp - gt.alpha_exp);
  return diff.lpNorm<1>() / static_cast<double>(diff.size());
}

double loss_transform(const ModelParams& params, const ModelParams& gt) {
  return (params.rotation - gt.rotation).lpNorm<1>() +
         std::abs(params.scale - gt.scale) +
         (params.translation - gt.translation).lpNorm<1>();
}

double loss_reg(const ModelParams& params) {
  return params.alpha_id.lpNorm<1>() + params.alpha_exp.lpNorm<1>();
}

double loss_warm(const MorphableBasis& basis, const ModelParams& params,
                 const LandmarkSet& target, const ModelParams& gt,
                 const FitConfig& cfg) {
  return loss_shape(basis, params, gt) +
         cfg.lambda1 * loss_landmark(basis, params, target, cfg.huber_delta) +
         cfg.lambda2 * loss_transform(params, gt) +
         cfg.lambda3 * loss_reg(params);
}

double loss_sub(const MorphableBasis& basis, const ModelParams& params,
                const LandmarkSet& target, const FitConfig& cfg) {
  return loss_landmark(basis, params, target, cfg.huber_delta) +
         cfg.lambda3 * loss_reg(params);
}

namespace {

// Landmark loss and gradient evaluated on the 68-landmark slice of the
// basis. Returns the loss; adds the scaled gradient into the flat gradient
// vector laid out as [alpha_id, alpha_exp, rotation, translation, scale].
double landmark_term(const detail::LandmarkSlice& slice,
                     const ModelParams& params, const LandmarkSet& target,
                     double huber_delta, double weight_scale,
                     Eigen::VectorXd* grad) {
  const int k = static_cast<int>(params.alpha_id.size());
  const int l = static_cast<int>(params.alpha_exp.size());
  const Eigen::Matrix3d r = rotation_matrix(params.rotation);
  Eigen::VectorXd shape = slice.mean;
  if (k > 0) shape += slice.id_cols * params.alpha_id;
  if (l > 0) shape += slice.exp_cols * params.alpha_exp;

  double acc = 0.0;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(3 * kLandmarkCount);
  Eigen::Vector3d g_t = Eigen::Vector3d::Zero();
  Eigen::Vector3d g_r = Eigen::Vector3d::Zero();
  double g_s = 0.0;
  Eigen::Matrix3d dr[3];
  for (int j = 0; j < 3; ++j) dr[j] = rotation_matrix_derivative(params.rotation, j);

  for (int i = 0; i < kLandmarkCount; ++i) {
    const Eigen::Vector3d v = shape.segment<3>(3 * i);
    const Eigen::Vector3d rv = r * v;
    const double px = params.scale * rv.x() + params.translation.x();
    const double py = params.scale * rv.y() + params.translation.y();
    const double ex = px - target.points(i, 0);
    const double ey = py - target.points(i, 1);
    const double w = target.weights[i] / static_cast<double>(kLandmarkCount);
    acc += w * (huber(ex, huber_delta) + huber(ey, huber_delta));
    if (grad == nullptr) continue;

    const Eigen::Vector3d q(w * huber_derivative(ex, huber_delta),
                            w * huber_derivative(ey, huber_delta), 0.0);
    g_t += q;
    g_s += q.dot(rv);
    for (int j = 0; j < 3; ++j) g_r[j] += params.scale * q.dot(dr[j] * v);
    u.segment<3>(3 * i) = params.scale * (r.transpose() * q);
  }

  if (grad != nullptr) {
    if (k > 0) grad->segment(0, k) += weight_scale * (slice.id_cols.transpose() * u);
    if (l > 0) grad->segment(k, l) += weight_scale * (slice.exp_cols.transpose() * u);
    grad->segment<3>(k + l) += weight_scale * g_r;
    grad->segment<3>(k + l + 3) += weight_scale * g_t;
    (*grad)[k + l + 6] += weight_scale * g_s;
  }
  return acc;
}

struct EvalContext {
  const MorphableBasis& basis;
  const detail::LandmarkSlice& slice;
  const LandmarkSet& target;
  const ModelParams* gt; // null for Objective::Sub
  const FitConfig& cfg;
};

double objective_eval(const EvalContext& ctx, const ModelParams& params,
                      Eigen::VectorXd* grad) {
  const int k = static_cast<int>(params.alpha_id.size());
  const int l = static_cast<int>(params.alpha_exp.size());
  if (grad != nullptr) grad->setZero(k + l + 7);

  const double lm_weight = ctx.gt != nullptr ? ctx.cfg.lambda1 : 1.0;
  double total = lm_weight * landmark_term(ctx.slice, params, ctx.target,
                                           ctx.cfg.huber_delta, lm_weight, grad);

  // L1 coefficient regularizer.
  total += ctx.cfg.lambda3 * loss_reg(params);
  if (grad != nullptr) {
    for (int i = 0; i < k; ++i) {
      (*grad)[i] += ctx.cfg.lambda3 * sign(params.alpha_id[i]);
    }
    for (int i = 0; i < l; ++i) {
      (*grad)[k + i] += ctx.cfg.lambda3 * sign(params.alpha_exp[i]);
    }
  }
  if (ctx.gt == nullptr) return total;

  // Warm-up terms against the ground truth parameters.
  const ModelParams& gt = *ctx.gt;
  const Eigen::VectorXd diff =
      ctx.basis.id_basis * (params.alpha_id - gt.alpha_id) +
      ctx.basis.exp_basis * (params.alpha_exp - gt.alpha_exp);
  const double n3 = static_cast<double>(diff.size());
  total += diff.lpNorm<1>() / n3;
  total += ctx.cfg.lambda2 * loss_transform(params, gt);
  if (grad != nullptr) {
    const Eigen::VectorXd sgn = diff.unaryExpr([](double v) { return sign(v); });
    if (k > 0) grad->segment(0, k) += (ctx.basis.id_basis.transpose() * sgn) / n3;
    if (l > 0) grad->segment(k, l) += (ctx.basis.exp_basis.transpose() * sgn) / n3;
    for (int j = 0; j < 3; ++j) {
      (*grad)[k + l + j] +=
          ctx.cfg.lambda2 * sign(params.rotation[j] - gt.rotation[j]);
      (*grad)[k + l + 3 + j] +=
          ctx.cfg.lambda2 * sign(params.translation[j] - gt.translation[j]);
    }
    (*grad)[k + l + 6] += ctx.cfg.lambda2 * sign(params.scale - gt.scale);
  }
  return total;
}

ModelParams unpack(const Eigen::VectorXd& x, int k, int l, bool log_scale) {
  ModelParams p;
  p.alpha_id = x.segment(0, k);
  p.alpha_exp = x.segment(k, l);
  p.rotation = x.segment<3>(k + l);
  p.translation = x.segment<3>(k + l + 3);
  p.scale = log_scale ? std::exp(x[k + l + 6]) : x[k + l + 6];
  return p;
}

ModelParams initial_guess(const detail::LandmarkSlice& slice,
                          const LandmarkSet& target, int k, int l) {
  ModelParams p = ModelParams::zeros(k, l);
  Eigen::Vector2d t_min = target.points.colwise().minCoeff();
  Eigen::Vector2d t_max = target.points.colwise().maxCoeff();
  Eigen::Vector2d m_min(std::numeric_limits<double>::max(),
                        std::numeric_limits<double>::max());
  Eigen::Vector2d m_max = -m_min;
  Eigen::Vector2d m_centroid = Eigen::Vector2d::Zero();
  for (int i = 0; i < kLandmarkCount; ++i) {
    const Eigen::Vector2d m(slice.mean[3 * i], slice.mean[3 * i + 1]);
    m_min = m_min.cwiseMin(m);
    m_max = m_max.cwiseMax(m);
    m_centroid += m / static_cast<double>(kLandmarkCount);
  }
  const double target_diag = (t_max - t_min).norm();
  const double mean_diag = (m_max - m_min).norm();
  double s = target_diag / mean_diag;
  if (!std::isfinite(s) || s <= 1e-8) s = 1.0;
  p.scale = s;
  const Eigen::Vector2d t_centroid = target.points.colwise().mean();
  p.translation.x() = t_centroid.x() - s * m_centroid.x();
  p.translation.y() = t_centroid.y() - s * m_centroid.y();
  return p;
}

} // namespace

Eigen::VectorXd gradient(Objective objective, const MorphableBasis& basis,
                         const ModelParams& params, const LandmarkSet& target,
                         const ModelParams* gt, const FitConfig& cfg) {
  basis.validate();
  target.validate();
  cfg.validate();
  if (objective == Objective::Warm && gt == nullptr) {
    throw InvalidParameterError("warm objective requires ground truth parameters");
  }
  if (params.alpha_id.size() != basis.id_dim() ||
      params.alpha_exp.size() != basis.exp_dim()) {
    throw ShapeError("parameters do not match basis dimensions");
  }
  if (gt != nullptr) check_same_dims(basis, params, *gt);
  const detail::LandmarkSlice slice = detail::landmark_slice(basis);
  const EvalContext ctx{basis, slice, target,
                        objective == Objective::Warm ? gt : nullptr, cfg};
  Eigen::VectorXd g;
  objective_eval(ctx, params, &g);
  return g;
}

FitReport fit(const MorphableBasis& basis, const LandmarkSet& target,
              const FitConfig& cfg, const ModelParams* gt,
              const std::optional<ModelParams>& init) {
  basis.validate();
  target.validate();
  cfg.validate();
  const int k = static_cast<int>(basis.id_dim());
  const int l = static_cast<int>(basis.exp_dim());
  if (gt != nullptr &&
      (gt->alpha_id.size() != k || gt->alpha_exp.size() != l)) {
    throw ShapeError("ground truth parameters do not match basis dimensions");
  }

  // The fit weights landmarks by the configured mask, not by whatever the
  // caller stored in the target set.
  LandmarkSet weighted = target;
  weighted.weights = cfg.landmark_weights;

  const detail::LandmarkSlice slice = detail::landmark_slice(basis);
  const EvalContext ctx{basis, slice, weighted, gt, cfg};

  ModelParams start;
  if (init.has_value()) {
    start = *init;
    if (start.alpha_id.size() != k || start.alpha_exp.size() != l) {
      throw ShapeError("initial parameters do not match basis dimensions");
    }
    if (!start.all_finite() || !(start.scale > 0.0)) {
      throw InvalidParameterError("initial parameters must be finite with scale > 0");
    }
  } else {
    start = initial_guess(slice, weighted, k, l);
  }

  const int n = k + l + 7;
  Eigen::VectorXd x(n);
  x.segment(0, k) = start.alpha_id;
  x.segment(k, l) = start.alpha_exp;
  x.segment<3>(k + l) = start.rotation;
  x.segment<3>(k + l + 3) = start.translation;
  x[n - 1] = std::log(start.scale);

  const auto eval = [&](const Eigen::VectorXd& xv, Eigen::VectorXd* g) {
    const ModelParams p = unpack(xv, k, l, /*log_scale=*/true);
    const double loss = objective_eval(ctx, p, g);
    if (g != nullptr) {
      // Chain rule through s = exp(u): dL/du = dL/ds * s.
      (*g)[n - 1] *= p.scale;
    }
    return loss;
  };

  FitReport report;
  double loss = eval(x, nullptr);
  report.loss_trace.push_back(loss);
  if (!std::isfinite(loss)) {
    throw OptimizationError("initial loss is not finite", report.loss_trace);
  }

  // Exact line minimization of the objective along one packed coordinate.
  // Every 1-D slice is unimodal for the coefficient, translation, and
  // log-scale coordinates (piecewise linear terms of linear arguments), so
  // bracketing plus golden-section finds the true slice minimum. The result
  // is accepted only when it strictly improves the loss.
  const auto line_min = [&](Eigen::VectorXd& xv, int j, double current) {
    const auto feval = [&](double value) {
      const double saved = xv[j];
      xv[j] = value;
      const double f = eval(xv, nullptr);
      xv[j] = saved;
      return f;
    };
    double h = 0.25;
    double center = xv[j];
    double f_center = current;
    double lo = center - h, hi = center + h;
    double f_lo = feval(lo), f_hi = feval(hi);
    for (int grow = 0; grow < 40 && !(f_center <= f_lo && f_center <= f_hi);
         ++grow) {
      if (f_lo < f_hi) {
        hi = center;
        f_hi = f_center;
        center = lo;
        f_center = f_lo;
        h *= 2.0;
        lo = center - h;
        f_lo = feval(lo);
      } else {
        lo = center;
        f_lo = f_center;
        center = hi;
        f_center = f_hi;
        h *= 2.0;
        hi = center + h;
        f_hi = feval(hi);
      }
    }
    const double gr = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double f_c = feval(c), f_d = feval(d);
    for (int gs = 0;
         gs < 90 && (b - a) > 1e-12 * (1.0 + std::abs(a) + std::abs(b)); ++gs) {
      if (f_c < f_d) {
        b = d;
        d = c;
        f_d = f_c;
        c = b - gr * (b - a);
        f_c = feval(c);
      } else {
        a = c;
        c = d;
        f_c = f_d;
        d = a + gr * (b - a);
        f_d = feval(d);
      }
    }
    const double best = 0.5 * (a + b);
    const double f_best = feval(best);
    if (f_best < current) {
      xv[j] = best;
      return f_best;
    }
    return current;
  };
  const auto sweep = [&](Eigen::VectorXd& xv, double current) {
    for (int j = 0; j < n; ++j) current = line_min(xv, j, current);
    return current;
  };

  const double momentum = 0.9;
  const size_t window = 10;
  const int sweep_cadence = 20;
  double eta = cfg.step_size;
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g(n);
  int since_sweep = 0;

  // Every recorded value must stay at or below the value 10 entries earlier.
  // The best iterate seen so far sits at or below every recorded value, so a
  // strict improvement on it always satisfies that anchor; whenever momentum
  // gets blocked, descent restarts from the best iterate.
  Eigen::VectorXd best_x = x;
  double best_loss = loss;
  const auto anchor = [&]() {
    const size_t len = report.loss_trace.size();
    return report.loss_trace[len >= window ? len - window : 0];
  };
  const auto commit = [&](const Eigen::VectorXd& xv, double new_loss, int it) {
    x = xv;
    loss = new_loss;
    report.loss_trace.push_back(loss);
    report.iterations_used = it;
    if (new_loss < best_loss) {
      best_loss = new_loss;
      best_x = xv;
    }
  };

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    // Periodic coordinate polish of the best iterate. Momentum subgradient
    // steps alone stall on the piecewise linear valley floor; the exact
    // slice minima keep cutting through it.
    if (++since_sweep >= sweep_cadence) {
      since_sweep = 0;
      Eigen::VectorXd polished = best_x;
      const double swept = sweep(polished, best_loss);
      if (swept < best_loss) {
        commit(polished, swept, it);
        velocity.setZero();
      }
      continue;
    }

    eval(x, &g);
    if (!g.allFinite()) {
      throw OptimizationError("gradient is not finite", report.loss_trace);
    }

    // A momentum step may raise the loss transiently as long as the trace
    // stays non-increasing across any 10-iteration window.
    const double bound = anchor();
    const Eigen::VectorXd step = momentum * velocity - eta * g;
    const Eigen::VectorXd cand = x + step;
    const double cand_loss = eval(cand, nullptr);
    if (std::isfinite(cand_loss) && cand_loss <= bound) {
      // Grow the step while momentum keeps passing the window bound.
      eta *= 2.0;
      velocity = step;
      const double delta = loss - cand_loss;
      commit(cand, cand_loss, it);
      if (delta >= 0.0 && delta < cfg.convergence_tol) break;
      continue;
    }

    // The excursion is blocked: reset momentum and backtrack along the raw
    // gradient of the best iterate until the loss strictly improves on it.
    eval(best_x, &g);
    if (!g.allFinite()) {
      throw OptimizationError("gradient is not finite", report.loss_trace);
    }
    bool improved = false;
    double local = eta;
    Eigen::VectorXd down;
    double down_loss = loss;
    for (int bt = 0; bt < 60 && !improved; ++bt) {
      local *= 0.5;
      down = best_x - local * g;
      down_loss = eval(down, nullptr);
      improved = std::isfinite(down_loss) && down_loss < best_loss;
    }
    if (improved) {
      eta = local;
      velocity = down - best_x;
      const double delta = best_loss - down_loss;
      commit(down, down_loss, it);
      if (delta < cfg.convergence_tol) break;
      continue;
    }

    // No gradient descent direction left; try one rescue polish.
    since_sweep = 0;
    Eigen::VectorXd polished = best_x;
    const double swept = sweep(polished, best_loss);
    if (swept < best_loss) {
      velocity.setZero();
      const double delta = best_loss - swept;
      commit(polished, swept, it);
      if (delta < cfg.convergence_tol) break;
      continue;
    }

    // Nothing improves the best iterate: settle on it and stop.
    if (loss > best_loss) commit(best_x, best_loss, it);
    break;
  }

  report.final_params = unpack(x, k, l, /*log_scale=*/true);
  report.final_loss = loss;
  if (!(report.final_params.scale > 0.0) || !report.final_params.all_finite()) {
    throw OptimizationError("optimizer produced non-finite parameters",
                            report.loss_trace);
  }

  const LandmarkSet pred = landmarks_2d(basis, report.final_params);
  double err = 0.0;
  for (int i = 0; i < kLandmarkCount; ++i) {
    err += (pred.points.row(i) - target.points.row(i)).norm();
  }
  report.mean_landmark_error_px = err / static_cast<double>(kLandmarkCount);
  return report;
}

} // namespace faceflow
