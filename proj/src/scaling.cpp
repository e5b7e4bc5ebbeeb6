#include "hdsp/scaling.hpp"

#include <cmath>
#include <string>

#include "hdsp/model.hpp"

namespace hdsp {

namespace {

constexpr double kExpClamp = 700.0;

double clamped_exp(double x) {
  if (x > kExpClamp) x = kExpClamp;
  if (x < -kExpClamp) x = -kExpClamp;
  return std::exp(x);
}

void check_binary(const Eigen::Ref<const Eigen::VectorXd>& r) {
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    if (r[j] != 0.0 && r[j] != 1.0) {
      fail(ErrorCode::domain, "label vector entry " + std::to_string(j) +
                                  " is not binary: " + std::to_string(r[j]));
    }
  }
}

}  // namespace

const char* scaling_kind_name(ScalingKind k) {
  return k == ScalingKind::categorical ? "categorical" : "loglinear";
}

ScalingKind parse_scaling_kind(const std::string& name) {
  if (name == "categorical") return ScalingKind::categorical;
  if (name == "loglinear") return ScalingKind::loglinear;
  fail(ErrorCode::config, "unknown scaling function '" + name + "'");
}

int ScalingModel::topics() const {
  return kind == ScalingKind::categorical ? static_cast<int>(cat.a_w.rows())
                                          : static_cast<int>(lin.w.rows());
}

int ScalingModel::labels() const {
  return kind == ScalingKind::categorical ? static_cast<int>(cat.a_w.cols())
                                          : static_cast<int>(lin.w.cols());
}

double scale_categorical(const Eigen::Ref<const Eigen::VectorXd>& w_row,
                         const Eigen::Ref<const Eigen::VectorXd>& r) {
  if (w_row.size() != r.size()) {
    fail(ErrorCode::dimension, "scale_categorical: size mismatch");
  }
  check_binary(r);
  double s = 1.0;
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    if (r[j] == 1.0) {
      if (!(w_row[j] > 0.0) || !std::isfinite(w_row[j])) {
        fail(ErrorCode::domain, "scale_categorical: non-positive weight");
      }
      s *= w_row[j];
    }
  }
  return s;
}

double scale_loglinear(const Eigen::Ref<const Eigen::VectorXd>& w_row,
                       const Eigen::Ref<const Eigen::VectorXd>& r) {
  if (w_row.size() != r.size()) {
    fail(ErrorCode::dimension, "scale_loglinear: size mismatch");
  }
  if (!w_row.allFinite() || !r.allFinite()) {
    fail(ErrorCode::domain, "scale_loglinear: non-finite input");
  }
  const double dot = w_row.dot(r);
  if (std::abs(dot) > kExpClamp) {
    fail(ErrorCode::saturation,
         "scale_loglinear: exponent " + std::to_string(-dot) + " saturates");
  }
  return std::exp(-dot);
}

ScalingExpectations expected_scaling(
    const ScalingModel& s, int k, const Eigen::Ref<const Eigen::VectorXd>& r) {
  ScalingExpectations out{1.0, 0.0, 1.0};
  if (s.kind == ScalingKind::categorical) {
    for (Eigen::Index j = 0; j < r.size(); ++j) {
      if (r[j] == 0.0) continue;
      const double a = s.cat.a_w(k, j);
      const double b = s.cat.b_w(k, j);
      out.scale *= a > 1.0 ? inv_gamma_mean(a, b) : inv_gamma_point(a, b);
      out.log_scale += inv_gamma_mean_log(a, b);
      out.inv_scale *= inv_gamma_mean_inv(a, b);
    }
  } else {
    const double dot = s.lin.w.row(k).dot(r);
    out.scale = clamped_exp(-dot);
    out.log_scale = -dot;
    out.inv_scale = clamped_exp(dot);
  }
  return out;
}

Eigen::VectorXd expected_inv_scale_all(
    const ScalingModel& s, const Eigen::Ref<const Eigen::VectorXd>& r) {
  const int T = s.topics();
  Eigen::VectorXd out(T);
  if (s.kind == ScalingKind::categorical) {
    out.setOnes();
    for (Eigen::Index j = 0; j < r.size(); ++j) {
      if (r[j] == 0.0) continue;
      out.array() *= s.cat.a_w.col(j).array() / s.cat.b_w.col(j).array();
    }
  } else {
    const Eigen::VectorXd dot = s.lin.w * r;
    for (int k = 0; k < T; ++k) {
      out[k] = clamped_exp(dot[k]);
    }
  }
  return out;
}

Eigen::VectorXd expected_log_scale_all(
    const ScalingModel& s, const Eigen::Ref<const Eigen::VectorXd>& r) {
  const int T = s.topics();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(T);
  if (s.kind == ScalingKind::categorical) {
    for (Eigen::Index j = 0; j < r.size(); ++j) {
      if (r[j] == 0.0) continue;
      for (int k = 0; k < T; ++k) {
        out[k] += inv_gamma_mean_log(s.cat.a_w(k, j), s.cat.b_w(k, j));
      }
    }
  } else {
    out = -(s.lin.w * r);
  }
  return out;
}

std::pair<double, double> update_w_categorical(
    int k, int j, double beta_p_k, const CategoricalScaling& state,
    const Eigen::Ref<const Eigen::MatrixXd>& R,
    const Eigen::Ref<const Eigen::VectorXd>& E_pi_col, double a_w0,
    double b_w0) {
  const Eigen::Index M = R.rows();
  const Eigen::Index J = R.cols();
  double label_count = 0.0;
  long double b_acc = 0.0L;
  for (Eigen::Index m = 0; m < M; ++m) {
    if (R(m, j) != 1.0) continue;
    label_count += 1.0;
    double prod = 1.0;
    for (Eigen::Index j2 = 0; j2 < J; ++j2) {
      if (j2 == j || R(m, j2) != 1.0) continue;
      prod *= state.a_w(k, j2) / state.b_w(k, j2);
    }
    b_acc += static_cast<long double>(prod) * E_pi_col[m];
  }
  const double a_new = beta_p_k * label_count + a_w0;
  const double b_new = static_cast<double>(b_acc) + b_w0;
  return {a_new, b_new};
}

void update_w_categorical_sweep(CategoricalScaling& state,
                                const Eigen::Ref<const Eigen::VectorXd>& beta_p,
                                const Eigen::Ref<const Eigen::MatrixXd>& R,
                                const Eigen::Ref<const Eigen::MatrixXd>& E_pi,
                                double a_w0, double b_w0, int repeats) {
  const int T = static_cast<int>(state.a_w.rows());
  const int J = static_cast<int>(state.a_w.cols());
  for (int k = 0; k < T; ++k) {
    for (int rep = 0; rep < repeats; ++rep) {
      for (int j = 0; j < J; ++j) {
        const auto [a_new, b_new] = update_w_categorical(
            k, j, beta_p[k], state, R, E_pi.col(k), a_w0, b_w0);
        state.a_w(k, j) = a_new;
        state.b_w(k, j) = b_new;
      }
    }
  }
}

double loglinear_objective(const Eigen::Ref<const Eigen::VectorXd>& w_row,
                           double beta_p_k,
                           const Eigen::Ref<const Eigen::MatrixXd>& R,
                           const Eigen::Ref<const Eigen::VectorXd>& E_pi_col,
                           double sigma) {
  const Eigen::VectorXd dot = R * w_row;
  long double acc = 0.0L;
  for (Eigen::Index m = 0; m < R.rows(); ++m) {
    acc += beta_p_k * dot[m] - std::exp(dot[m]) * E_pi_col[m];
  }
  acc -= w_row.squaredNorm() / (2.0 * sigma);
  return static_cast<double>(acc);
}

Eigen::VectorXd loglinear_gradient(
    const Eigen::Ref<const Eigen::VectorXd>& w_row, double beta_p_k,
    const Eigen::Ref<const Eigen::MatrixXd>& R,
    const Eigen::Ref<const Eigen::VectorXd>& E_pi_col, double sigma) {
  const Eigen::ArrayXd expdot = (R * w_row).array().exp();
  Eigen::VectorXd g =
      R.transpose() *
      (Eigen::VectorXd::Constant(R.rows(), beta_p_k) -
       (expdot * E_pi_col.array()).matrix());
  g -= w_row / sigma;
  return g;
}

Eigen::MatrixXd loglinear_hessian(
    const Eigen::Ref<const Eigen::VectorXd>& w_row, double beta_p_k,
    const Eigen::Ref<const Eigen::MatrixXd>& R,
    const Eigen::Ref<const Eigen::VectorXd>& E_pi_col, double sigma) {
  (void)beta_p_k;  // linear term drops out of the curvature
  const Eigen::ArrayXd weight = (R * w_row).array().exp() * E_pi_col.array();
  Eigen::MatrixXd H = -(R.transpose() * weight.matrix().asDiagonal() * R);
  H.diagonal().array() -= 1.0 / sigma;
  return H;
}

NewtonResult update_w_loglinear(
    const Eigen::Ref<const Eigen::VectorXd>& w_init, double beta_p_k,
    const Eigen::Ref<const Eigen::MatrixXd>& R,
    const Eigen::Ref<const Eigen::VectorXd>& E_pi_col, double sigma,
    const NewtonOptions& opts) {
  if (!w_init.allFinite()) {
    fail(ErrorCode::domain, "update_w_loglinear: non-finite starting point");
  }
  NewtonResult res;
  res.w = w_init;
  double f_cur = loglinear_objective(res.w, beta_p_k, R, E_pi_col, sigma);
  for (res.iterations = 0; res.iterations < opts.max_iters; ++res.iterations) {
    const Eigen::VectorXd g =
        loglinear_gradient(res.w, beta_p_k, R, E_pi_col, sigma);
    res.grad_inf_norm = g.lpNorm<Eigen::Infinity>();
    if (res.grad_inf_norm <= opts.tol) {
      return res;
    }
    // -H is positive definite (exp weights plus I/sigma), so LLT applies.
    const Eigen::MatrixXd neg_hess =
        -loglinear_hessian(res.w, beta_p_k, R, E_pi_col, sigma);
    Eigen::LLT<Eigen::MatrixXd> llt(neg_hess);
    Eigen::VectorXd direction;
    if (llt.info() == Eigen::Success) {
      direction = llt.solve(g);
    } else {
      direction = g * (sigma / (1.0 + g.lpNorm<Eigen::Infinity>()));
    }
    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opts.max_step_halvings; ++h) {
      const Eigen::VectorXd trial = res.w + step * direction;
      const double f_trial =
          loglinear_objective(trial, beta_p_k, R, E_pi_col, sigma);
      if (std::isfinite(f_trial) && f_trial >= f_cur) {
        res.w = trial;
        f_cur = f_trial;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      break;  // numerically stationary; final gradient check below
    }
  }
  const Eigen::VectorXd g =
      loglinear_gradient(res.w, beta_p_k, R, E_pi_col, sigma);
  res.grad_inf_norm = g.lpNorm<Eigen::Infinity>();
  if (res.grad_inf_norm > opts.tol) {
    fail(ErrorCode::convergence,
         "update_w_loglinear: no convergence in " +
             std::to_string(opts.max_iters) + " iterations, |grad|_inf = " +
             std::to_string(res.grad_inf_norm));
  }
  return res;
}

Eigen::MatrixXd labels_matrix(const Corpus& corpus) {
  const int M = corpus.num_docs();
  const int J = corpus.num_labels();
  Eigen::MatrixXd R(M, J);
  for (int m = 0; m < M; ++m) {
    R.row(m) = corpus.docs[m].labels.transpose();
  }
  return R;
}

}  // namespace hdsp
