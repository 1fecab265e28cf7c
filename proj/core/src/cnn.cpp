#include "capfade/cnn.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "capfade/error.hpp"

namespace capfade::cnn {

std::vector<double> conv1d(std::span<const double> x, std::span<const double> kernel) {
  if (kernel.empty() || kernel.size() % 2 == 0) {
    fail(ErrorKind::InvalidArgument, "conv1d: kernel width must be odd");
  }
  if (kernel.size() > x.size()) {
    fail(ErrorKind::InvalidArgument, "conv1d: kernel wider than input");
  }
  const auto m = static_cast<long>(x.size());
  const long p = static_cast<long>(kernel.size() / 2);
  std::vector<double> y(x.size(), 0.0);
  for (long n = 0; n < m; ++n) {
    double acc = 0.0;
    for (long k = -p; k <= p; ++k) {
      long src = n - k;
      if (src >= 0 && src < m) acc += x[src] * kernel[k + p];
    }
    y[n] = acc;
  }
  return y;
}

CnnArch CnnArch::standard(std::size_t input_length) {
  CnnArch a;
  a.input_length = input_length;
  a.stages = {{3, 8, 2, 0.10}, {3, 8, 2, 0.10}};
  a.dense_widths = {16, 1};
  return a;
}

void require_valid(const CnnArch& arch) {
  if (arch.input_length == 0) fail(ErrorKind::InvalidArgument, "cnn: input length is 0");
  std::size_t length = arch.input_length;
  for (const auto& s : arch.stages) {
    if (s.kernel_width < 1 || s.kernel_width % 2 == 0) {
      fail(ErrorKind::InvalidArgument, "cnn: kernel widths must be odd");
    }
    if (static_cast<std::size_t>(s.kernel_width) > length) {
      fail(ErrorKind::InvalidArgument, "cnn: kernel wider than its input");
    }
    if (s.channels < 1 || s.pool_width < 1) {
      fail(ErrorKind::InvalidArgument, "cnn: channels and pool width must be >= 1");
    }
    if (!(s.dropout >= 0.0 && s.dropout < 1.0)) {
      fail(ErrorKind::InvalidArgument, "cnn: dropout must lie in [0, 1)");
    }
    length /= static_cast<std::size_t>(s.pool_width);
    if (length == 0) fail(ErrorKind::InvalidArgument, "cnn: pooling leaves no samples");
  }
  if (arch.dense_widths.empty() || arch.dense_widths.back() != 1) {
    fail(ErrorKind::InvalidArgument, "cnn: final dense width must be 1");
  }
  for (int w : arch.dense_widths) {
    if (w < 1) fail(ErrorKind::InvalidArgument, "cnn: dense widths must be >= 1");
  }
}

std::vector<std::uint8_t> ForwardCache::activation_pattern() const {
  std::vector<std::uint8_t> bits;
  for (const auto& s : stages) {
    for (double z : s.pre) bits.push_back(z > 0.0);
    for (std::size_t idx : s.argmax) {
      for (int b = 0; b < 4; ++b) bits.push_back(static_cast<std::uint8_t>((idx >> (8 * b)) & 0xff));
    }
  }
  for (std::size_t l = 0; l + 1 < dense.size(); ++l) {
    for (double z : dense[l].pre) bits.push_back(z > 0.0);
  }
  return bits;
}

Network::Network(CnnArch arch) : arch_(std::move(arch)) {
  require_valid(arch_);
  std::size_t cursor = 0;
  std::size_t in_channels = 1;
  std::size_t length = arch_.input_length;
  for (const auto& s : arch_.stages) {
    StageLayout l{};
    l.in_channels = in_channels;
    l.weights = cursor;
    cursor += static_cast<std::size_t>(s.channels) * in_channels * s.kernel_width;
    l.biases = cursor;
    cursor += static_cast<std::size_t>(s.channels);
    l.length = length;
    l.pooled_length = length / static_cast<std::size_t>(s.pool_width);
    stage_layout_.push_back(l);
    in_channels = static_cast<std::size_t>(s.channels);
    length = l.pooled_length;
  }
  std::size_t in = in_channels * length;
  for (int w : arch_.dense_widths) {
    DenseLayout l{};
    l.in = in;
    l.out = static_cast<std::size_t>(w);
    l.weights = cursor;
    cursor += l.in * l.out;
    l.biases = cursor;
    cursor += l.out;
    dense_layout_.push_back(l);
    in = l.out;
  }
  params_.assign(cursor, 0.0);
}

void Network::initialize(Rng& rng) {
  std::fill(params_.begin(), params_.end(), 0.0);
  for (std::size_t s = 0; s < stage_layout_.size(); ++s) {
    const auto& l = stage_layout_[s];
    const auto& st = arch_.stages[s];
    double fan_in = static_cast<double>(l.in_channels * st.kernel_width);
    double bound = std::sqrt(6.0 / fan_in);
    for (std::size_t i = l.weights; i < l.biases; ++i) params_[i] = rng.uniform(-bound, bound);
  }
  for (const auto& l : dense_layout_) {
    double bound = std::sqrt(6.0 / static_cast<double>(l.in));
    for (std::size_t i = l.weights; i < l.biases; ++i) params_[i] = rng.uniform(-bound, bound);
  }
}

double Network::forward(std::span<const double> x, Mode mode, Rng* rng,
                        ForwardCache* cache) const {
  if (x.size() != arch_.input_length) {
    fail(ErrorKind::InvalidArgument, "cnn: input has " + std::to_string(x.size()) +
                                         " samples, network expects " +
                                         std::to_string(arch_.input_length));
  }
  if (cache) {
    cache->stages.assign(stage_layout_.size(), {});
    cache->dense.assign(dense_layout_.size(), {});
  }
  std::vector<double> cur(x.begin(), x.end());

  for (std::size_t s = 0; s < stage_layout_.size(); ++s) {
    const auto& l = stage_layout_[s];
    const auto& st = arch_.stages[s];
    const std::size_t m = l.length;
    const auto channels = static_cast<std::size_t>(st.channels);
    const long p = st.kernel_width / 2;
    const std::size_t kw = static_cast<std::size_t>(st.kernel_width);

    std::vector<double> pre(channels * m);
    for (std::size_t c = 0; c < channels; ++c) {
      const double bias = params_[l.biases + c];
      for (std::size_t n = 0; n < m; ++n) {
        double acc = bias;
        for (std::size_t ci = 0; ci < l.in_channels; ++ci) {
          const double* w = &params_[l.weights + (c * l.in_channels + ci) * kw];
          const double* in = &cur[ci * m];
          for (long k = -p; k <= p; ++k) {
            long src = static_cast<long>(n) - k;
            if (src >= 0 && src < static_cast<long>(m)) acc += in[src] * w[k + p];
          }
        }
        pre[c * m + n] = acc;
      }
    }

    const std::size_t pw = static_cast<std::size_t>(st.pool_width);
    const std::size_t pm = l.pooled_length;
    std::vector<double> pooled(channels * pm);
    std::vector<std::size_t> argmax(channels * pm);
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t j = 0; j < pm; ++j) {
        std::size_t best = c * m + j * pw;
        double best_v = std::max(pre[best], 0.0);
        for (std::size_t t = 1; t < pw; ++t) {
          std::size_t idx = c * m + j * pw + t;
          double v = std::max(pre[idx], 0.0);
          if (v > best_v) {
            best_v = v;
            best = idx;
          }
        }
        pooled[c * pm + j] = best_v;
        argmax[c * pm + j] = best;
      }
    }

    std::vector<double> mask;
    if (mode == Mode::Train && st.dropout > 0.0) {
      if (!rng) fail(ErrorKind::InvalidArgument, "cnn: dropout in training needs a random stream");
      mask.resize(pooled.size());
      const double keep_scale = 1.0 / (1.0 - st.dropout);
      for (std::size_t i = 0; i < pooled.size(); ++i) {
        mask[i] = rng->uniform() >= st.dropout ? keep_scale : 0.0;
        pooled[i] *= mask[i];
      }
    }

    if (cache) {
      auto& cs = cache->stages[s];
      cs.input = std::move(cur);
      cs.pre = std::move(pre);
      cs.argmax = std::move(argmax);
      cs.mask = std::move(mask);
      cs.length = m;
      cs.pooled_length = pm;
    }
    cur = std::move(pooled);
  }

  for (std::size_t d = 0; d < dense_layout_.size(); ++d) {
    const auto& l = dense_layout_[d];
    const bool last = d + 1 == dense_layout_.size();
    std::vector<double> pre(l.out);
    for (std::size_t o = 0; o < l.out; ++o) {
      const double* w = &params_[l.weights + o * l.in];
      double acc = params_[l.biases + o];
      for (std::size_t i = 0; i < l.in; ++i) acc += w[i] * cur[i];
      pre[o] = acc;
    }
    std::vector<double> next(pre);
    if (!last) {
      for (double& v : next) v = std::max(v, 0.0);
    }
    if (cache) {
      cache->dense[d].input = std::move(cur);
      cache->dense[d].pre = std::move(pre);
    }
    cur = std::move(next);
  }
  if (cache) cache->output = cur.front();
  return cur.front();
}

void Network::backward(const ForwardCache& cache, double d_output,
                       std::span<double> grad) const {
  if (grad.size() != params_.size()) {
    fail(ErrorKind::InvalidArgument, "cnn: gradient buffer has the wrong size");
  }
  std::vector<double> d_cur{d_output};

  for (std::size_t d = dense_layout_.size(); d-- > 0;) {
    const auto& l = dense_layout_[d];
    const auto& c = cache.dense[d];
    const bool last = d + 1 == dense_layout_.size();
    std::vector<double> d_pre(l.out);
    for (std::size_t o = 0; o < l.out; ++o) {
      d_pre[o] = last || c.pre[o] > 0.0 ? d_cur[o] : 0.0;
    }
    std::vector<double> d_in(l.in, 0.0);
    for (std::size_t o = 0; o < l.out; ++o) {
      if (d_pre[o] == 0.0) continue;
      const double* w = &params_[l.weights + o * l.in];
      double* gw = &grad[l.weights + o * l.in];
      for (std::size_t i = 0; i < l.in; ++i) {
        gw[i] += d_pre[o] * c.input[i];
        d_in[i] += w[i] * d_pre[o];
      }
      grad[l.biases + o] += d_pre[o];
    }
    d_cur = std::move(d_in);
  }

  for (std::size_t s = stage_layout_.size(); s-- > 0;) {
    const auto& l = stage_layout_[s];
    const auto& st = arch_.stages[s];
    const auto& c = cache.stages[s];
    const std::size_t m = l.length;
    const auto channels = static_cast<std::size_t>(st.channels);
    const long p = st.kernel_width / 2;
    const std::size_t kw = static_cast<std::size_t>(st.kernel_width);

    std::vector<double> d_pre(channels * m, 0.0);
    for (std::size_t j = 0; j < d_cur.size(); ++j) {
      double g = c.mask.empty() ? d_cur[j] : d_cur[j] * c.mask[j];
      std::size_t idx = c.argmax[j];
      if (c.pre[idx] > 0.0) d_pre[idx] += g;
    }

    std::vector<double> d_in(l.in_channels * m, 0.0);
    for (std::size_t ch = 0; ch < channels; ++ch) {
      double gb = 0.0;
      for (std::size_t n = 0; n < m; ++n) gb += d_pre[ch * m + n];
      grad[l.biases + ch] += gb;
      for (std::size_t ci = 0; ci < l.in_channels; ++ci) {
        const std::size_t woff = l.weights + (ch * l.in_channels + ci) * kw;
        const double* in = &c.input[ci * m];
        double* din = &d_in[ci * m];
        for (long k = -p; k <= p; ++k) {
          const double w = params_[woff + static_cast<std::size_t>(k + p)];
          double gw = 0.0;
          for (std::size_t n = 0; n < m; ++n) {
            long src = static_cast<long>(n) - k;
            if (src < 0 || src >= static_cast<long>(m)) continue;
            const double g = d_pre[ch * m + n];
            gw += g * in[src];
            din[src] += g * w;
          }
          grad[woff + static_cast<std::size_t>(k + p)] += gw;
        }
      }
    }
    d_cur = std::move(d_in);
  }
}

double CnnModel::predict(std::span<const double> row) const {
  return forward(*this, row, Mode::Infer);
}

double forward(const CnnModel& model, std::span<const double> x, Mode mode, Rng* rng) {
  std::vector<double> scaled(x.begin(), x.end());
  for (double& v : scaled) v *= model.feature_scale();
  return model.network().forward(scaled, mode, rng) * model.target_scale();
}

CnnModel train(std::span<const std::vector<double>> rows, std::span<const double> targets,
               const CnnArch& arch, const TrainConfig& cfg,
               std::span<const bool> validation_eligible) {
  require_valid(arch);
  if (rows.size() < 2) fail(ErrorKind::InsufficientData, "cnn: need at least 2 training rows");
  if (rows.size() != targets.size()) {
    fail(ErrorKind::InvalidArgument, "cnn: rows and targets differ in length");
  }
  if (cfg.epochs < 1 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0) ||
      !(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0) ||
      !(cfg.momentum >= 0.0 && cfg.momentum < 1.0) || !(cfg.feature_scale > 0.0)) {
    fail(ErrorKind::InvalidArgument, "cnn: invalid training configuration");
  }
  double target_scale = 0.0;
  for (double t : targets) {
    if (!std::isfinite(t)) fail(ErrorKind::InvalidArgument, "cnn: non-finite target");
    target_scale = std::max(target_scale, std::abs(t));
  }
  if (target_scale == 0.0) target_scale = 1.0;

  std::vector<std::vector<double>> x(rows.begin(), rows.end());
  for (auto& r : x) {
    if (r.size() != arch.input_length) {
      fail(ErrorKind::InvalidArgument, "cnn: row length differs from the input length");
    }
    for (double& v : r) v *= cfg.feature_scale;
  }

  const std::size_t n = rows.size();
  if (!validation_eligible.empty() && validation_eligible.size() != n) {
    fail(ErrorKind::InvalidArgument, "cnn: validation mask misaligned with rows");
  }
  std::vector<std::size_t> eligible, always_train;
  for (std::size_t i = 0; i < n; ++i) {
    if (validation_eligible.empty() || validation_eligible[i]) {
      eligible.push_back(i);
    } else {
      always_train.push_back(i);
    }
  }
  if (eligible.empty()) fail(ErrorKind::InsufficientData, "cnn: no validation-eligible rows");
  Rng split(derive_stream(cfg.seed, "cnn.split"));
  split.shuffle(std::span<std::size_t>(eligible));
  auto n_val = static_cast<std::size_t>(
      std::lround(cfg.validation_fraction * static_cast<double>(eligible.size())));
  n_val = std::max<std::size_t>(n_val, 1);
  if (always_train.empty()) n_val = std::min(n_val, eligible.size() - 1);
  n_val = std::min(n_val, eligible.size());
  const auto cut = eligible.end() - static_cast<long>(n_val);
  std::vector<std::size_t> train_idx(always_train);
  train_idx.insert(train_idx.end(), eligible.begin(), cut);
  std::vector<std::size_t> val_idx(cut, eligible.end());

  Network net(arch);
  Rng init(derive_stream(cfg.seed, "cnn.init"));
  net.initialize(init);

  const std::size_t np = net.param_count();
  std::vector<double> grad(np), velocity(np, 0.0);
  std::vector<double> best_params(net.params().begin(), net.params().end());
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::vector<EpochRecord> history;
  history.reserve(cfg.epochs);
  ForwardCache cache;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng(derive_stream(cfg.seed, "cnn.epoch", {epoch}));
    std::vector<std::size_t> batch_order = train_idx;
    rng.shuffle(std::span<std::size_t>(batch_order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < batch_order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(batch_order.size(), start + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = batch_order[b];
        double y = net.forward(x[i], Mode::Train, &rng, &cache);
        double diff = y - targets[i] / target_scale;
        loss_sum += diff * diff;
        net.backward(cache, 2.0 * diff * inv_batch, grad);
      }
      auto params = net.params();
      for (std::size_t k = 0; k < np; ++k) {
        velocity[k] = cfg.momentum * velocity[k] - cfg.learning_rate * grad[k];
        params[k] += velocity[k];
      }
    }
    const double train_loss = loss_sum / static_cast<double>(train_idx.size());
    if (!std::isfinite(train_loss)) {
      fail(ErrorKind::TrainingFailure,
           "cnn: loss diverged at epoch " + std::to_string(epoch));
    }
    double val_err = 0.0;
    for (std::size_t i : val_idx) {
      val_err += std::abs(net.forward(x[i], Mode::Infer) * target_scale - targets[i]);
    }
    const double val_mae = val_err / static_cast<double>(val_idx.size());
    if (!std::isfinite(val_mae)) {
      fail(ErrorKind::TrainingFailure,
           "cnn: validation error diverged at epoch " + std::to_string(epoch));
    }
    history.push_back({epoch, train_loss, val_mae});
    if (val_mae < best_val) {
      best_val = val_mae;
      best_epoch = epoch;
      best_params.assign(net.params().begin(), net.params().end());
    }
  }

  std::copy(best_params.begin(), best_params.end(), net.params().begin());
  CnnModel model(std::move(net), cfg.feature_scale, target_scale);
  model.best_epoch = best_epoch;
  model.best_val_mae = best_val;
  model.history = std::move(history);
  return model;
}

GradCheckReport gradient_check(const Network& network, std::span<const double> x,
                               double target, double tolerance, const GradientHook& tamper) {
  constexpr double kStep = 1e-5;
  Network probe = network;
  ForwardCache cache;
  const double y = probe.forward(x, Mode::Infer, nullptr, &cache);
  const auto base_pattern = cache.activation_pattern();
  std::vector<double> analytic(probe.param_count(), 0.0);
  probe.backward(cache, y - target, analytic);
  if (tamper) tamper(analytic);

  auto loss_and_pattern = [&](std::vector<std::uint8_t>& pattern) {
    ForwardCache c;
    double out = probe.forward(x, Mode::Infer, nullptr, &c);
    pattern = c.activation_pattern();
    return 0.5 * (out - target) * (out - target);
  };

  GradCheckReport report;
  auto params = probe.params();
  std::vector<std::uint8_t> plus_pattern, minus_pattern;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double original = params[i];
    params[i] = original + kStep;
    const double plus = loss_and_pattern(plus_pattern);
    params[i] = original - kStep;
    const double minus = loss_and_pattern(minus_pattern);
    params[i] = original;
    if (plus_pattern != base_pattern || minus_pattern != base_pattern) {
      report.excluded.push_back(i);
      continue;
    }
    const double numeric = (plus - minus) / (2.0 * kStep);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    report.max_relative_error =
        std::max(report.max_relative_error, std::abs(analytic[i] - numeric) / denom);
    ++report.checked;
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

GradCheckReport gradient_check(const CnnArch& arch, std::span<const double> x, double target,
                               double tolerance, std::uint64_t seed) {
  for (const auto& s : arch.stages) {
    if (s.dropout != 0.0) {
      fail(ErrorKind::InvalidArgument, "gradient check requires dropout disabled");
    }
  }
  Network net(arch);
  Rng rng(seed);
  net.initialize(rng);
  // Non-zero biases keep ReLU inputs away from exact zeros.
  for (double& p : net.params()) {
    if (p == 0.0) p = rng.uniform(-0.1, 0.1);
  }
  return gradient_check(net, x, target, tolerance);
}

namespace {

constexpr char kMagic[8] = {'C', 'A', 'P', 'F', 'C', 'N', 'N', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  void bytes(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint64_t unsigned_le(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(unsigned_le(4)); }
  std::uint64_t u64() { return unsigned_le(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) fail(ErrorKind::Parse, "cnn snapshot: truncated");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::string_view data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size()));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void save_model(std::ostream& out, const CnnModel& model) {
  const auto& arch = model.network().arch();
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kFormatVersion);
  w.u64(arch.input_length);
  w.u32(static_cast<std::uint32_t>(arch.stages.size()));
  for (const auto& s : arch.stages) {
    w.i32(s.kernel_width);
    w.i32(s.channels);
    w.i32(s.pool_width);
    w.f64(s.dropout);
  }
  w.u32(static_cast<std::uint32_t>(arch.dense_widths.size()));
  for (int d : arch.dense_widths) w.i32(d);
  w.f64(model.feature_scale());
  w.f64(model.target_scale());
  w.u64(model.best_epoch);
  w.f64(model.best_val_mae);
  const auto params = model.network().params();
  w.u64(params.size());
  for (double p : params) w.f64(p);
  const std::uint32_t crc = crc_of(w.data());
  w.u32(crc);
  out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
  if (!out) fail(ErrorKind::Io, "cnn snapshot: write failed");
}

CnnModel load_model(std::istream& in) {
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() < sizeof kMagic + 8) fail(ErrorKind::Parse, "cnn snapshot: truncated");
  std::string_view body(data.data(), data.size() - 4);
  Reader trailer(std::string_view(data).substr(data.size() - 4));
  if (trailer.u32() != crc_of(body)) fail(ErrorKind::Parse, "cnn snapshot: checksum mismatch");

  Reader r(body);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    fail(ErrorKind::Parse, "cnn snapshot: bad magic");
  }
  const std::uint32_t version = r.u32();
  if (version != kFormatVersion) {
    fail(ErrorKind::Parse, "cnn snapshot: unsupported version " + std::to_string(version));
  }
  CnnArch arch;
  arch.input_length = r.u64();
  arch.stages.resize(r.u32());
  for (auto& s : arch.stages) {
    s.kernel_width = r.i32();
    s.channels = r.i32();
    s.pool_width = r.i32();
    s.dropout = r.f64();
  }
  arch.dense_widths.resize(r.u32());
  for (int& d : arch.dense_widths) d = r.i32();
  const double feature_scale = r.f64();
  const double target_scale = r.f64();
  const std::uint64_t best_epoch = r.u64();
  const double best_val = r.f64();
  Network net(arch);
  if (r.u64() != net.param_count()) {
    fail(ErrorKind::Parse, "cnn snapshot: parameter count does not match the architecture");
  }
  for (double& p : net.params()) p = r.f64();
  if (r.position() != body.size()) fail(ErrorKind::Parse, "cnn snapshot: trailing bytes");
  CnnModel model(std::move(net), feature_scale, target_scale);
  model.best_epoch = best_epoch;
  model.best_val_mae = best_val;
  return model;
}

void save_model(const std::filesystem::path& path, const CnnModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
  save_model(out, model);
}

CnnModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return load_model(in);
}

void write_training_curve_csv(std::ostream& out, std::span<const EpochRecord> history) {
  out << "epoch,train_loss,val_mae\n";
  out.precision(17);
  for (const auto& e : history) {
    out << e.epoch << ',' << e.train_loss << ',' << e.val_mae << '\n';
  }
}

}  // namespace capfade::cnn
