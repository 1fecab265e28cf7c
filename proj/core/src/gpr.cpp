#include "capfade/gpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <nlohmann/json.hpp>
#include <numbers>
#include <ostream>
#include <string>

#include "capfade/error.hpp"

namespace capfade::gpr {
namespace {

const double kSqrt3 = std::sqrt(3.0);

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double kernel_at(double r, const GprHyper& h) {
  double z = kSqrt3 * r / h.length_scale;
  return h.signal_variance * (1.0 + z) * std::exp(-z);
}

void check_rows(std::span<const Row> rows, std::span<const double> targets) {
  if (rows.empty()) fail(ErrorKind::InsufficientData, "gpr: no training rows");
  if (rows.size() != targets.size()) {
    fail(ErrorKind::InvalidArgument, "gpr: rows and targets differ in length");
  }
  const std::size_t d = rows.front().size();
  if (d == 0) fail(ErrorKind::InvalidArgument, "gpr: empty feature rows");
  for (const auto& r : rows) {
    if (r.size() != d) fail(ErrorKind::InvalidArgument, "gpr: feature rows differ in length");
  }
  for (double t : targets) {
    if (!std::isfinite(t)) fail(ErrorKind::InvalidArgument, "gpr: non-finite target");
  }
}

Eigen::MatrixXd distance_matrix(std::span<const Row> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      D(i, j) = D(j, i) = distance(rows[i], rows[j]);
    }
  }
  return D;
}

/// Cholesky of K + noise I; false when a pivot collapses to rounding level.
bool factorize(const Eigen::MatrixXd& K, Eigen::LLT<Eigen::MatrixXd>& llt) {
  llt.compute(K);
  if (llt.info() != Eigen::Success) return false;
  const double scale = K.diagonal().maxCoeff();
  const double floor = static_cast<double>(K.rows()) *
                       std::numeric_limits<double>::epsilon() * scale;
  Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (!(diag(i) * diag(i) > floor)) return false;
  }
  return true;
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v) {
  double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

}  // namespace

void require_valid(const GprHyper& h) {
  if (!(h.length_scale > 0.0) || !(h.signal_variance > 0.0) || !(h.noise_variance >= 0.0) ||
      !std::isfinite(h.length_scale) || !std::isfinite(h.signal_variance) ||
      !std::isfinite(h.noise_variance)) {
    fail(ErrorKind::InvalidArgument,
         "gpr: need length_scale > 0, signal_variance > 0, noise_variance >= 0");
  }
}

double matern32(std::span<const double> a, std::span<const double> b, const GprHyper& h) {
  if (a.size() != b.size()) {
    fail(ErrorKind::InvalidArgument, "matern32: feature rows differ in length");
  }
  return kernel_at(distance(a, b), h);
}

double matern32_bessel_form(double r, const GprHyper& h) {
  if (r == 0.0) return h.signal_variance;
  const double nu = 1.5;
  const double z = std::sqrt(2.0 * nu) * r / h.length_scale;
  return h.signal_variance * std::pow(2.0, 1.0 - nu) / std::tgamma(nu) *
         std::pow(z, nu) * std::cyl_bessel_k(nu, z);
}

GprModel GprModel::fit(std::span<const Row> rows, std::span<const double> targets,
                       const GprHyper& hyper) {
  check_rows(rows, targets);
  require_valid(hyper);
  GprModel m;
  m.hyper_ = hyper;
  m.dimension_ = rows.front().size();
  m.rows_.assign(rows.begin(), rows.end());
  m.target_mean_ = mean_of(targets);

  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd K = distance_matrix(rows).unaryExpr(
      [&](double r) { return kernel_at(r, hyper); });
  K.diagonal().array() += hyper.noise_variance;
  if (!factorize(K, m.factor_)) {
    fail(ErrorKind::IllConditioned,
         "gpr: kernel matrix is not positive definite to working precision; "
         "increase noise_variance");
  }
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = targets[i] - m.target_mean_;
  m.alpha_ = m.factor_.solve(y);
  return m;
}

Prediction GprModel::predict(std::span<const double> row) const {
  if (row.size() != dimension_) {
    fail(ErrorKind::InvalidArgument, "gpr: query has " + std::to_string(row.size()) +
                                         " features, model expects " +
                                         std::to_string(dimension_));
  }
  const auto n = static_cast<Eigen::Index>(rows_.size());
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) k(i) = kernel_at(distance(rows_[i], row), hyper_);
  Prediction p;
  p.mean = target_mean_ + k.dot(alpha_);
  Eigen::VectorXd v = factor_.matrixL().solve(k);
  p.variance = std::max(0.0, hyper_.signal_variance - v.squaredNorm());
  return p;
}

std::vector<Prediction> GprModel::predict(std::span<const Row> rows) const {
  std::vector<Prediction> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(predict(r));
  return out;
}

GprHyper select_best(std::span<const GprHyper> grid, std::span<const double> cv_mae) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const auto& a = grid[i];
    const auto& b = grid[best];
    if (cv_mae[i] < cv_mae[best] ||
        (cv_mae[i] == cv_mae[best] &&
         (a.length_scale < b.length_scale ||
          (a.length_scale == b.length_scale && a.signal_variance < b.signal_variance)))) {
      best = i;
    }
  }
  return grid[best];
}

TuneResult tune_grouped(std::span<const Row> rows, std::span<const double> targets,
                        std::span<const GprHyper> grid, std::size_t k,
                        std::span<const std::size_t> groups,
                        std::span<const bool> holdout_eligible) {
  check_rows(rows, targets);
  if (grid.empty()) fail(ErrorKind::InvalidArgument, "gpr tune: empty grid");
  if (k < 2) fail(ErrorKind::InvalidArgument, "gpr tune: need k >= 2 folds");
  if (groups.size() != rows.size() || holdout_eligible.size() != rows.size()) {
    fail(ErrorKind::InvalidArgument, "gpr tune: group annotations misaligned");
  }
  for (const auto& h : grid) require_valid(h);

  // Eligible groups in order of first appearance.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (holdout_eligible[i] &&
        std::find(order.begin(), order.end(), groups[i]) == order.end()) {
      order.push_back(groups[i]);
    }
  }
  if (order.size() < k) {
    fail(ErrorKind::InvalidArgument, "gpr tune: " + std::to_string(order.size()) +
                                         " holdout groups for " + std::to_string(k) +
                                         " folds");
  }

  struct Fold {
    std::vector<Eigen::Index> train, valid;
  };
  std::vector<Fold> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::size_t lo = f * order.size() / k, hi = (f + 1) * order.size() / k;
    auto in_fold = [&](std::size_t g) {
      for (std::size_t t = lo; t < hi; ++t) {
        if (order[t] == g) return true;
      }
      return false;
    };
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto idx = static_cast<Eigen::Index>(i);
      if (in_fold(groups[i])) {
        if (holdout_eligible[i]) folds[f].valid.push_back(idx);
      } else {
        folds[f].train.push_back(idx);
      }
    }
  }

  const Eigen::MatrixXd D = distance_matrix(rows);
  TuneResult result;
  result.cv_mae.assign(grid.size(), std::numeric_limits<double>::infinity());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const GprHyper& h = grid[g];
    double total = 0.0;
    bool ok = true;
    for (const auto& fold : folds) {
      if (fold.train.empty() || fold.valid.empty()) {
        ok = false;
        break;
      }
      const auto nt = static_cast<Eigen::Index>(fold.train.size());
      Eigen::MatrixXd K(nt, nt);
      double mean = 0.0;
      for (auto i : fold.train) mean += targets[i];
      mean /= static_cast<double>(nt);
      Eigen::VectorXd y(nt);
      for (Eigen::Index a = 0; a < nt; ++a) {
        y(a) = targets[fold.train[a]] - mean;
        for (Eigen::Index b = 0; b < nt; ++b) {
          K(a, b) = kernel_at(D(fold.train[a], fold.train[b]), h);
        }
        K(a, a) += h.noise_variance;
      }
      Eigen::LLT<Eigen::MatrixXd> llt;
      if (!factorize(K, llt)) {
        ok = false;
        break;
      }
      Eigen::VectorXd alpha = llt.solve(y);
      double err = 0.0;
      for (auto v : fold.valid) {
        double pred = mean;
        for (Eigen::Index a = 0; a < nt; ++a) {
          pred += kernel_at(D(v, fold.train[a]), h) * alpha(a);
        }
        err += std::abs(pred - targets[v]);
      }
      total += err / static_cast<double>(fold.valid.size());
    }
    if (ok) result.cv_mae[g] = total / static_cast<double>(folds.size());
  }

  if (std::none_of(result.cv_mae.begin(), result.cv_mae.end(),
                   [](double v) { return std::isfinite(v); })) {
    fail(ErrorKind::IllConditioned, "gpr tune: no grid point could be fitted");
  }
  result.best = select_best(grid, result.cv_mae);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto& h = grid[g];
    if (h.length_scale == result.best.length_scale &&
        h.signal_variance == result.best.signal_variance &&
        h.noise_variance == result.best.noise_variance) {
      result.best_cv_mae = result.cv_mae[g];
      break;
    }
  }
  return result;
}

TuneResult tune(std::span<const Row> rows, std::span<const double> targets,
                std::span<const GprHyper> grid, std::size_t k) {
  if (k > rows.size()) {
    fail(ErrorKind::InvalidArgument, "gpr tune: " + std::to_string(k) + " folds for " +
                                         std::to_string(rows.size()) + " rows");
  }
  std::vector<std::size_t> groups(rows.size());
  for (std::size_t i = 0; i < groups.size(); ++i) groups[i] = i;
  std::unique_ptr<bool[]> eligible(new bool[rows.size()]);
  std::fill_n(eligible.get(), rows.size(), true);
  return tune_grouped(rows, targets, grid, k, groups,
                      std::span<const bool>(eligible.get(), rows.size()));
}

std::vector<GprHyper> default_grid(std::span<const Row> rows,
                                   std::span<const double> targets,
                                   std::size_t length_points) {
  check_rows(rows, targets);
  std::vector<double> dists;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      dists.push_back(distance(rows[i], rows[j]));
    }
  }
  double scale = 1.0;
  if (!dists.empty()) {
    std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
    double median = dists[dists.size() / 2];
    if (median > 0.0) scale = median;
  }
  double var = variance_of(targets);
  if (!(var > 0.0)) var = 1.0;

  std::vector<GprHyper> grid;
  length_points = std::max<std::size_t>(length_points, 1);
  for (std::size_t i = 0; i < length_points; ++i) {
    double t = length_points == 1 ? 0.5 : static_cast<double>(i) / (length_points - 1);
    double ell = scale * std::pow(10.0, -1.0 + 4.0 * t);
    for (double sv : {0.5, 1.0, 2.0}) {
      for (double nv : {1e-6, 1e-3, 1e-1}) {
        grid.push_back({ell, sv * var, nv * var});
      }
    }
  }
  return grid;
}

void write_summary_json(std::ostream& out, const GprModel& model, double cv_mae) {
  nlohmann::ordered_json j;
  j["kernel"] = "matern32";
  j["length_scale"] = model.hyper().length_scale;
  j["signal_variance"] = model.hyper().signal_variance;
  j["noise_variance"] = model.hyper().noise_variance;
  j["dimension"] = model.dimension();
  j["training_size"] = model.training_size();
  j["cv_mae"] = cv_mae;
  out << j.dump(2) << '\n';
}

}  // namespace capfade::gpr
