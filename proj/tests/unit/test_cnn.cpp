#include <doctest.h>

#include <cmath>
#include <sstream>

#include "capfade/cnn.hpp"
#include "capfade/error.hpp"

using namespace capfade;
using namespace capfade::cnn;

TEST_CASE("conv1d follows the index convention with zero padding") {
  std::vector<double> x{1, 2, 3};
  std::vector<double> id{1};
  CHECK(conv1d(x, id) == x);
  std::vector<double> delta{0, 1, 0};
  CHECK(conv1d(x, delta) == x);
  // w[-1] = 1: y[n] = x[n + 1].
  std::vector<double> lead{1, 0, 0};
  CHECK(conv1d(x, lead) == std::vector<double>{2, 3, 0});
  std::vector<double> wide{1, 0, 0, 0, 0};
  CHECK_THROWS_AS(conv1d(x, wide), Error);
  std::vector<double> even{1, 0};
  CHECK_THROWS_AS(conv1d(x, even), Error);

  Rng rng(6);
  std::vector<double> a(9), b(9), w(5);
  for (double& v : a) v = rng.uniform(-1, 1);
  for (double& v : b) v = rng.uniform(-1, 1);
  for (double& v : w) v = rng.uniform(-1, 1);
  std::vector<double> mix(9);
  for (std::size_t i = 0; i < 9; ++i) mix[i] = 2.5 * a[i] - 0.75 * b[i];
  auto ya = conv1d(a, w), yb = conv1d(b, w), ym = conv1d(mix, w);
  for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(ym[i] - (2.5 * ya[i] - 0.75 * yb[i])) <= 1e-12);
}

TEST_CASE("forward shape, zero weights and determinism") {
  auto arch = CnnArch::standard(50);
  Network net(arch);
  std::vector<double> x(50, 0.9);
  CHECK(net.forward(x, Mode::Infer) == 0.0);
  Rng rng(1);
  net.initialize(rng);
  double a = net.forward(x, Mode::Infer), b = net.forward(x, Mode::Infer);
  CHECK(a == b);
  std::vector<double> short_x(49, 0.9);
  CHECK_THROWS_AS(net.forward(short_x, Mode::Infer), Error);
}

TEST_CASE("tiny network matches a hand composition") {
  // One conv channel (width 3), no pooling, one linear output unit.
  CnnArch arch;
  arch.input_length = 5;
  arch.stages = {{3, 1, 1, 0.0}};
  arch.dense_widths = {1};
  Network net(arch);
  auto p = net.params();
  REQUIRE(p.size() == 3 + 1 + 5 + 1);
  // Layout: conv weights w[-1..1], conv bias, dense weights, dense bias.
  double w[3] = {0.5, -1.0, 0.25}, cb = 0.1, dw[5] = {1, 2, 3, 4, 5}, db = -0.5;
  for (int i = 0; i < 3; ++i) p[i] = w[i];
  p[3] = cb;
  for (int i = 0; i < 5; ++i) p[4 + i] = dw[i];
  p[9] = db;

  std::vector<double> x{1.0, -2.0, 0.5, 3.0, -1.0};
  double want = db;
  for (int n = 0; n < 5; ++n) {
    double y = cb;
    for (int k = -1; k <= 1; ++k) {
      int idx = n - k;
      if (idx >= 0 && idx < 5) y += x[idx] * w[k + 1];
    }
    want += dw[n] * std::max(0.0, y);
  }
  CHECK(net.forward(x, Mode::Infer) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("gradient check: pass, kinks and a corrupted gradient") {
  CnnArch lin;
  lin.input_length = 4;
  lin.dense_widths = {1};
  std::vector<double> x{0.3, -0.2, 0.9, 1.1};
  auto rep = gradient_check(lin, x, 0.7, 1e-7, 3);
  CHECK(rep.passed);
  CHECK(rep.max_relative_error <= 1e-7);

  CnnArch arch;
  arch.input_length = 8;
  arch.stages = {{3, 2, 2, 0.0}};
  arch.dense_widths = {3, 1};
  std::vector<double> x8{0.5, 1.0, 0.7, 1.3, 0.9, 0.6, 1.2, 0.8};
  CHECK(gradient_check(arch, x8, 0.2, 1e-4, 11).passed);

  Network net(arch);
  Rng rng(11);
  net.initialize(rng);
  auto flip = [](std::span<double> g) {
    for (double& v : g) v = -v;
  };
  auto bad = gradient_check(net, x8, 0.2, 1e-4, flip);
  CHECK_FALSE(bad.passed);

  // A zero conv bias with an input that makes a pre-activation exactly 0
  // puts that unit at its kink.
  CnnArch kink;
  kink.input_length = 3;
  kink.stages = {{1, 1, 1, 0.0}};
  kink.dense_widths = {1};
  Network kn(kink);
  auto kp = kn.params();
  kp[0] = 1.0;
  kp[1] = 0.0;
  kp[2] = 1.0;
  kp[3] = 1.0;
  kp[4] = 1.0;
  kp[5] = 0.0;
  std::vector<double> xk{1.0, 0.0, 2.0};
  auto kr = gradient_check(kn, xk, 0.0, 1e-4);
  CHECK(kr.passed);
  CHECK_FALSE(kr.excluded.empty());

  CnnArch dropout = arch;
  dropout.stages[0].dropout = 0.1;
  CHECK_THROWS_AS(gradient_check(dropout, x8, 0.2, 1e-4, 1), Error);
}

TEST_CASE("training: constant targets, determinism and best snapshot") {
  // Zero inputs leave only the output bias to learn.
  std::vector<std::vector<double>> zeros(20, std::vector<double>(12, 0.0));
  std::vector<double> flat(20, 500.0);
  CnnArch arch;
  arch.input_length = 12;
  arch.dense_widths = {1};
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 9;
  auto m = train(zeros, flat, arch, cfg);
  CHECK(std::abs(m.predict(zeros[0]) - 500.0) <= 5.0);

  Rng rng(4);
  std::vector<std::vector<double>> rows(20, std::vector<double>(12));
  for (auto& r : rows) {
    for (double& v : r) v = rng.uniform(0.8, 1.0);
  }
  cfg.epochs = 1;
  auto one = train(rows, flat, arch, cfg);
  CHECK(one.history.size() == 1);

  std::vector<double> t;
  for (const auto& r : rows) t.push_back(1000.0 * r[0] + 200.0 * r[5]);
  cfg.epochs = 60;
  auto std_arch = CnnArch::standard(12);
  auto a = train(rows, t, std_arch, cfg);
  auto b = train(rows, t, std_arch, cfg);
  CHECK(std::equal(a.network().params().begin(), a.network().params().end(),
                   b.network().params().begin(), b.network().params().end()));
  REQUIRE(a.history.size() == 60);
  for (const auto& e : a.history) CHECK(a.best_val_mae <= e.val_mae);
  CHECK(a.best_val_mae <= a.history.back().val_mae);
}

TEST_CASE("validation uses only eligible rows") {
  std::vector<std::vector<double>> rows(6, std::vector<double>(4, 1.0));
  for (std::size_t i = 0; i < 6; ++i) rows[i][0] = 0.1 * static_cast<double>(i);
  std::vector<double> t{1, 2, 3, 4, 5, 6};
  bool eligible[6] = {true, true, false, false, false, false};
  CnnArch arch;
  arch.input_length = 4;
  TrainConfig cfg;
  cfg.epochs = 3;
  auto m = train(rows, t, arch, cfg, std::span<const bool>(eligible, 6));
  CHECK(m.history.size() == 3);
  bool none[6] = {false, false, false, false, false, false};
  CHECK_THROWS_AS(train(rows, t, arch, cfg, std::span<const bool>(none, 6)), Error);
}

TEST_CASE("snapshot round trip and corruption") {
  auto arch = CnnArch::standard(16);
  Network net(arch);
  Rng rng(3);
  net.initialize(rng);
  CnnModel m(net, 0.5, 1200.0);
  m.best_epoch = 17;
  m.best_val_mae = 12.5;
  std::stringstream buf;
  save_model(buf, m);
  auto bytes = buf.str();
  std::istringstream in(bytes);
  auto back = load_model(in);
  CHECK(std::equal(back.network().params().begin(), back.network().params().end(),
                   m.network().params().begin(), m.network().params().end()));
  CHECK(back.feature_scale() == 0.5);
  CHECK(back.target_scale() == 1200.0);
  CHECK(back.best_epoch == 17);
  std::vector<double> x(16, 0.9);
  CHECK(back.predict(x) == m.predict(x));

  bytes[bytes.size() / 2] ^= 0x40;
  std::istringstream bad(bytes);
  try {
    load_model(bad);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
  }

  std::ostringstream csv;
  std::vector<EpochRecord> h{{0, 1.5, 2.5}, {1, 1.0, 2.0}};
  write_training_curve_csv(csv, h);
  CHECK(csv.str() == "epoch,train_loss,val_mae\n0,1.5,2.5\n1,1,2\n");
}
