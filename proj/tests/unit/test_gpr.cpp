#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "capfade/error.hpp"
#include "capfade/gpr.hpp"
#include "capfade/rng.hpp"

using namespace capfade;
using namespace capfade::gpr;

namespace {

std::vector<Row> random_rows(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<Row> rows(n, Row(d));
  for (auto& r : rows) {
    for (double& v : r) v = rng.uniform(-1.0, 1.0);
  }
  return rows;
}

}  // namespace

TEST_CASE("matern32 values") {
  GprHyper h{1.0, 1.0, 0.0};
  std::vector<double> a{0.0, 0.0}, b{1.0, 0.0};
  CHECK(matern32(a, a, h) == 1.0);
  // (1 + sqrt 3) exp(-sqrt 3), evaluated independently in double precision.
  CHECK(matern32(a, b, h) == doctest::Approx(0.4833577245965077).epsilon(1e-14));
  std::vector<double> c{0.3, 0.0};
  CHECK(matern32(a, c, h) == doctest::Approx(0.9037901598990385).epsilon(1e-14));
  GprHyper h2{0.7, 2.0, 0.0};
  std::vector<double> far{2.5, 0.0};
  CHECK(matern32(a, far, h2) == doctest::Approx(2.0 * 0.014790420647549025).epsilon(1e-13));
  CHECK(matern32(b, a, h) == matern32(a, b, h));

  double prev = 1.0;
  for (double r = 0.1; r < 30; r *= 1.5) {
    std::vector<double> p{r, 0.0};
    double v = matern32(a, p, h);
    CHECK(v < prev);
    prev = v;
  }
  std::vector<double> wrong{1.0};
  CHECK_THROWS_AS(matern32(a, wrong, h), Error);
}

TEST_CASE("kernel is translation invariant and positive semi-definite") {
  Rng rng(8);
  GprHyper h{0.8, 1.5, 0.0};
  for (int trial = 0; trial < 50; ++trial) {
    auto rows = random_rows(rng, 12, 4);
    Eigen::MatrixXd k(12, 12);
    for (int i = 0; i < 12; ++i) {
      for (int j = 0; j < 12; ++j) k(i, j) = matern32(rows[i], rows[j], h);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8 * h.signal_variance);

    auto moved = rows;
    for (auto& r : moved) {
      for (double& v : r) v += 3.25;
    }
    CHECK(std::abs(matern32(moved[0], moved[1], h) - matern32(rows[0], rows[1], h)) <= 1e-12);
  }
}

TEST_CASE("fit and predict") {
  std::vector<Row> one{{0.5, 0.5}};
  std::vector<double> t1{42.0};
  auto m = GprModel::fit(one, t1, {1.0, 1.0, 0.0});
  CHECK(m.predict(one[0]).mean == doctest::Approx(42.0));
  CHECK(m.predict(one[0]).variance == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<Row> two{{0.0}, {100.0}};
  std::vector<double> t2{10.0, 20.0};
  auto m2 = GprModel::fit(two, t2, {1.0, 1.0, 1e-10});
  std::vector<double> near{0.001};
  CHECK(std::abs(m2.predict(near).mean - 10.0) < 1e-2);
  std::vector<double> far{1e6};
  CHECK(m2.predict(far).mean == doctest::Approx(15.0));
  CHECK(m2.predict(far).variance == doctest::Approx(1.0));

  std::vector<Row> dup{{1.0}, {1.0}};
  try {
    GprModel::fit(dup, t2, {1.0, 1.0, 0.0});
    FAIL("expected ill-conditioned");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IllConditioned);
  }

  Rng rng(4);
  auto rows = random_rows(rng, 10, 3);
  std::vector<double> flat(10, 7.5);
  auto mc = GprModel::fit(rows, flat, {0.5, 1.0, 1e-6});
  for (const auto& p : mc.predict(random_rows(rng, 5, 3))) CHECK(p.mean == doctest::Approx(7.5).epsilon(1e-9));
  std::vector<double> short_row{1.0};
  CHECK_THROWS_AS(mc.predict(short_row), Error);
}

TEST_CASE("tune picks the grid minimum") {
  Rng rng(21);
  auto rows = random_rows(rng, 20, 2);
  std::vector<double> t;
  for (const auto& r : rows) t.push_back(3.0 * r[0] - 2.0 * r[1] + 1.0);

  std::vector<GprHyper> single{{0.5, 1.0, 1e-6}};
  CHECK(tune(rows, t, single, 4).best.length_scale == 0.5);

  auto grid = default_grid(rows, t, 5);
  CHECK(grid.size() == 45);
  auto res = tune(rows, t, grid, 5);
  double best = res.cv_mae.front();
  for (double v : res.cv_mae) best = std::min(best, v);
  CHECK(res.best_cv_mae == best);

  CHECK_THROWS_AS(tune(rows, t, grid, 21), Error);

  // Ties go to the smaller length scale, then the smaller signal variance.
  std::vector<GprHyper> tied{{2.0, 1.0, 0.0}, {1.0, 2.0, 0.0}, {1.0, 1.0, 0.0}};
  std::vector<double> equal{1.0, 1.0, 1.0};
  auto chosen = select_best(tied, equal);
  CHECK(chosen.length_scale == 1.0);
  CHECK(chosen.signal_variance == 1.0);
}

TEST_CASE("grouped tuning keeps derived rows out of held-out folds") {
  Rng rng(2);
  auto rows = random_rows(rng, 12, 2);
  std::vector<double> t;
  for (const auto& r : rows) t.push_back(r[0] + r[1]);
  std::vector<std::size_t> groups{0, 1, 2, 3, 4, 5, 0, 1, 2, 3, 4, 5};
  bool eligible[12] = {true, true, true, true, true, true, false, false, false, false, false, false};
  auto grid = default_grid(rows, t, 3);
  auto res = tune_grouped(rows, t, grid, 3, groups, std::span<const bool>(eligible, 12));
  CHECK(std::isfinite(res.best_cv_mae));
  CHECK_THROWS_AS(tune_grouped(rows, t, grid, 7, groups, std::span<const bool>(eligible, 12)), Error);
}

TEST_CASE("summary json") {
  std::vector<Row> rows{{0.0}, {1.0}};
  std::vector<double> t{1.0, 2.0};
  auto m = GprModel::fit(rows, t, {1.0, 1.0, 1e-6});
  std::ostringstream out;
  write_summary_json(out, m, 0.25);
  CHECK(out.str().find("\"length_scale\"") != std::string::npos);
  CHECK(out.str().find("\"training_size\": 2") != std::string::npos);
}
