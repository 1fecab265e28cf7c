#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <vector>

// Gaussian-process regression with a Matern nu = 3/2 covariance. Used as the
// shallow benchmark model: one capacity window in, one landmark cycle out.
namespace capfade::gpr {

using Row = std::vector<double>;

struct GprHyper {
  double length_scale = 1.0;
  double signal_variance = 1.0;
  double noise_variance = 0.0;
};

void require_valid(const GprHyper& h);

/// sigma^2 (1 + sqrt(3) r / l) exp(-sqrt(3) r / l), r the Euclidean distance.
double matern32(std::span<const double> a, std::span<const double> b, const GprHyper& h);

/// Same kernel from its general Matern form with nu = 3/2:
/// sigma^2 2^(1-nu)/Gamma(nu) z^nu K_nu(z), z = sqrt(2 nu) r / l,
/// with K_{3/2}(z) = sqrt(pi / (2z)) e^-z (1 + 1/z). Used to cross-check the
/// closed form.
double matern32_bessel_form(double distance, const GprHyper& h);

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

class GprModel {
 public:
  /// Builds K + sigma_n^2 I over the rows, factorizes it, and solves for the
  /// centred targets. Throws IllConditioned if the factorization breaks down.
  static GprModel fit(std::span<const Row> rows, std::span<const double> targets,
                      const GprHyper& hyper);

  Prediction predict(std::span<const double> row) const;
  std::vector<Prediction> predict(std::span<const Row> rows) const;

  const GprHyper& hyper() const noexcept { return hyper_; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t training_size() const noexcept { return rows_.size(); }
  double target_mean() const noexcept { return target_mean_; }

 private:
  GprModel() = default;

  GprHyper hyper_;
  std::size_t dimension_ = 0;
  std::vector<Row> rows_;
  double target_mean_ = 0.0;
  Eigen::VectorXd alpha_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
};

/// Mean k-fold validation MAE of every grid point; contiguous folds.
struct TuneResult {
  GprHyper best;
  double best_cv_mae = 0.0;
  std::vector<double> cv_mae;  // aligned with the grid; +inf where a fit failed
};

TuneResult tune(std::span<const Row> rows, std::span<const double> targets,
                std::span<const GprHyper> grid, std::size_t k);

/// Group-aware variant. `groups[i]` names the source of row i and
/// `holdout_eligible[i]` marks rows that may be validated on. Folds are formed
/// over the eligible groups; a fold's training set excludes every row of the
/// fold's groups, so rows derived from a held-out source never leak into
/// training.
TuneResult tune_grouped(std::span<const Row> rows, std::span<const double> targets,
                        std::span<const GprHyper> grid, std::size_t k,
                        std::span<const std::size_t> groups,
                        std::span<const bool> holdout_eligible);

/// Grid point chosen by tune(): lowest CV MAE, ties to smaller length scale,
/// then smaller signal variance.
GprHyper select_best(std::span<const GprHyper> grid, std::span<const double> cv_mae);

/// Log-spaced length scales over [0.1, 1000] x the median pairwise row
/// distance, signal variances {0.5, 1, 2} x var(targets), noise variances
/// {1e-6, 1e-3, 1e-1} x var(targets).
std::vector<GprHyper> default_grid(std::span<const Row> rows,
                                   std::span<const double> targets,
                                   std::size_t length_points = 9);

/// JSON summary: hyperparameters, input dimension, training size, CV MAE.
void write_summary_json(std::ostream& out, const GprModel& model, double cv_mae);

}  // namespace capfade::gpr
