// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bench_data.hpp"
#include "capfade/cnn.hpp"
#include "capfade/dataset_io.hpp"
#include "capfade/error.hpp"
#include "capfade/eval.hpp"
#include "capfade/gpr.hpp"
#include "capfade/landmarks.hpp"
#include "capfade/sdg.hpp"
#include "commands.hpp"
#include "config.hpp"

using namespace capfade;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void verdict(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("criterion %2d  %-32s %s  %s\n", id, name.c_str(), pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void skipped(int id, const std::string& name, const std::string& detail) {
  std::printf("criterion %2d  %-32s SKIP  %s\n", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Decreasing curve with occasional recovery bumps; unit spacing from cycle 1
// unless `gaps` is set.
CapacityCurve random_curve(Rng& rng, std::size_t length, bool gaps, const std::string& id) {
  CapacityCurve c{id, {}, {}, 2.0};
  int cycle = gaps ? 1 + static_cast<int>(rng.index(10)) : 1;
  double q = rng.uniform(1.0, 3.0);
  for (std::size_t i = 0; i < length; ++i) {
    c.cycles.push_back(cycle);
    c.capacities.push_back(q);
    cycle += gaps ? 1 + static_cast<int>(rng.index(3)) : 1;
    q -= rng.uniform() < 0.05 ? -rng.uniform(0.0, 1e-3) : rng.uniform(0.0, 5e-4);
  }
  return c;
}

double at_cycle(const CapacityCurve& c, int cycle) {
  auto it = std::lower_bound(c.cycles.begin(), c.cycles.end(), cycle);
  if (it == c.cycles.end() || *it != cycle) return std::numeric_limits<double>::quiet_NaN();
  return c.capacities[static_cast<std::size_t>(it - c.cycles.begin())];
}

fs::path scratch_dir(const std::string& tag) {
  auto p = fs::temp_directory_path() / ("capfade-acceptance-" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_csv(const fs::path& dir, const Dataset& d) {
  auto p = dir / "cells.csv";
  std::ofstream f(p);
  write_dataset_csv(f, d);
  return p;
}

// ---------------------------------------------------------------------------

void sdg_identity() {
  Rng rng(derive_stream(1, "acceptance.identity"));
  std::vector<CapacityCurve> curves;
  for (int i = 0; i < 200; ++i) {
    curves.push_back(random_curve(rng, 2 + rng.index(1500), i % 2 == 1, "c" + std::to_string(i)));
  }
  auto t0 = Clock::now();
  double worst = 0.0;
  bool lengths_ok = true;
  for (const auto& c : curves) {
    auto out = sdg::apply_params(c, {0.0, 0.0, 1.0});
    lengths_ok &= out.first_cycle() == c.first_cycle() && out.last_cycle() == c.last_cycle();
    for (std::size_t k = 0; k < c.size(); ++k) {
      worst = std::max(worst, std::abs(at_cycle(out, c.cycles[k]) - c.capacities[k]));
    }
  }
  double t = seconds_since(t0);
  verdict(1, "SDG identity", lengths_ok && worst <= 1e-12 && t < 1.0,
          fmt("200 curves, max |dQ| = %.3g, %.3f s", worst, t));
}

void sdg_algebra() {
  Rng rng(derive_stream(1, "acceptance.algebra"));
  double worst_offset = 0.0, worst_slope = 0.0;
  int final_bad = 0, length_bad = 0, redraws = 0;
  for (int i = 0; i < 1000; ++i) {
    bool unit = i % 2 == 0;
    auto c = random_curve(rng, 2 + rng.index(1200), !unit, "a");
    // Strong compression can fold the stretched axis; such draws are rejected
    // as degenerate by design and redrawn.
    sdg::SdgParams p;
    CapacityCurve full;
    for (;;) {
      p = {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(0.5, 1.5)};
      try {
        full = sdg::apply_params(c, p);
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateOutput) throw;
        ++redraws;
      }
    }
    auto no_offset = sdg::apply_params(c, {0.0, p.slope, p.elongation});
    for (std::size_t j = 0; j < full.size(); ++j) {
      worst_offset = std::max(worst_offset,
                              std::abs(full.capacities[j] - no_offset.capacities[j] - p.offset));
    }

    auto sloped = sdg::apply_params(c, {0.0, p.slope, 1.0});
    const double last = static_cast<double>(c.size() - 1);
    for (std::size_t k = 0; k < c.size(); ++k) {
      double want = c.capacities[k] + p.slope * static_cast<double>(k) / last;
      worst_slope = std::max(worst_slope, std::abs(at_cycle(sloped, c.cycles[k]) - want));
    }

    long expected_final = std::lround(p.elongation * c.last_cycle());
    if (full.last_cycle() != expected_final || full.first_cycle() != c.first_cycle()) ++final_bad;
    if (unit) {
      long target_len = std::lround(static_cast<double>(c.size()) * p.elongation);
      if (std::labs(static_cast<long>(full.size()) - target_len) > 1) ++length_bad;
    }
  }

  // e = 2 on three unit-spaced points: C' = {1, 3, 6}; integer cycles 1..6
  // interpolate linearly between (1, 2.0), (3, 1.9) and (6, 1.8).
  CapacityCurve seed{"w", {1, 2, 3}, {2.0, 1.9, 1.8}, 2.0};
  auto worked = sdg::apply_params(seed, {0.0, 0.0, 2.0});
  const std::vector<double> hand{2.0, 1.95, 1.9, 1.9 - 0.1 / 3.0, 1.9 - 0.2 / 3.0, 1.8};
  double worst_worked = worked.size() == hand.size() ? 0.0 : 1.0;
  for (std::size_t k = 0; k < std::min(hand.size(), worked.size()); ++k) {
    worst_worked = std::max(worst_worked, std::abs(worked.capacities[k] - hand[k]));
  }

  bool pass = worst_offset <= 1e-12 && worst_slope <= 1e-12 && final_bad == 0 &&
              length_bad == 0 && worst_worked <= 1e-12;
  std::ostringstream d;
  d << "offset " << worst_offset << ", slope " << worst_slope << ", final-cycle misses "
    << final_bad << ", length misses " << length_bad << ", e=2 example " << worst_worked
    << " (" << redraws << " folded draws redrawn)";
  verdict(2, "SDG algebra", pass, d.str());
}

void round_trip() {
  Rng rng(derive_stream(1, "acceptance.roundtrip"));
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    auto c = random_curve(rng, 20 + rng.index(1500), false, "j");
    const int n_cycles = c.last_cycle();
    // Slope is observable at the last cycle when the axis is not stretched.
    sdg::SdgParams p{rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 1.0};
    auto got = sdg::estimate_params(sdg::apply_params(c, p), c, n_cycles);
    worst = std::max({worst, std::abs(got.offset - p.offset), std::abs(got.slope - p.slope),
                      std::abs(got.elongation - p.elongation)});
    // Elongation is observable exactly when e N lands on an integer cycle.
    long m = std::lround(n_cycles * rng.uniform(0.6, 1.4));
    sdg::SdgParams q{rng.uniform(-0.2, 0.2), 0.0, static_cast<double>(m) / n_cycles};
    auto got_q = sdg::estimate_params(sdg::apply_params(c, q), c, 0);
    worst = std::max({worst, std::abs(got_q.offset - q.offset), std::abs(got_q.slope),
                      std::abs(got_q.elongation - q.elongation)});
  }

  int antisym_bad = 0;
  for (int i = 0; i < 500; ++i) {
    auto a = random_curve(rng, 300 + rng.index(900), false, "a");
    auto b = random_curve(rng, 300 + rng.index(900), false, "b");
    int n = 2 + static_cast<int>(rng.index(298));
    auto ab = sdg::estimate_params(a, b, n);
    auto ba = sdg::estimate_params(b, a, n);
    double direct = static_cast<double>(a.last_cycle()) / static_cast<double>(b.last_cycle());
    bool ok = ab.offset == -ba.offset && ab.slope == -ba.slope && ab.elongation == direct &&
              std::abs(ab.elongation - 1.0 / ba.elongation) <= std::nextafter(direct, 10.0) - direct;
    antisym_bad += !ok;
  }
  verdict(3, "round trip", worst <= 1e-9 && antisym_bad == 0,
          fmt("max |dp| = %.3g over 1000 recoveries, antisymmetry violations %.0f / 500", worst,
              antisym_bad));
}

void knee_oracle() {
  Rng rng(derive_stream(1, "acceptance.knee"));
  int clean_hits = 0, noisy_hits = 0;
  for (int i = 0; i < 100; ++i) {
    int length = 400 + static_cast<int>(rng.index(1200));
    int knee = static_cast<int>(length * rng.uniform(0.4, 0.85));
    double early = rng.uniform(1e-4, 4e-4);
    double late = early * rng.uniform(5.0, 15.0);
    double q0 = 2.0;
    double bottom = q0 - early * knee - late * (length - knee);
    if (bottom < 0.2) late = (q0 - 0.2 - early * knee) / (length - knee);

    Rng none(0);
    auto clean = testing::make_two_slope_curve(knee, length, q0, early, late, 0.0, none);
    auto k = landmarks::detect_knee(clean);
    clean_hits += k && std::abs(*k - knee) <= 2;

    Rng noise(derive_stream(1, "acceptance.knee.noise", {static_cast<std::uint64_t>(i)}));
    auto noisy = testing::make_two_slope_curve(knee, length, q0, early, late, 0.005, noise);
    auto kn = landmarks::detect_knee(noisy);
    noisy_hits += kn && std::abs(*kn - knee) <= 10;
  }
  verdict(4, "knee oracle", clean_hits >= 95 && noisy_hits >= 95,
          fmt("noise-free within 2: %.0f/100, noisy within 10: %.0f/100", clean_hits, noisy_hits));
}

void landmark_fixtures() {
  const char* dir = std::getenv("CAPFADE_DATA_DIR");
  if (!dir || !*dir) {
    skipped(5, "landmark fixtures",
            "CAPFADE_DATA_DIR not set; criterion 4 stands in for it");
    return;
  }
  struct Fixture {
    const char* file;
    const char* profile;
    std::vector<std::pair<int, int>> knee_eol;
  };
  const std::vector<Fixture> fixtures{
      {"rwth.csv", "rwth",
       {{1305, 1336}, {792, 941}, {1365, 1402}, {1008, 1072}, {1251, 1306}, {1212, 1223},
        {1188, 1240}}},
      {"stanford.csv", "stanford",
       {{629, 742}, {561, 677}, {777, 872}, {779, 891}, {690, 771}, {743, 827}, {618, 706},
        {472, 529}, {409, 453}}}};
  int checked = 0, within = 0;
  std::string problem;
  auto out_dir = scratch_dir("fixtures");
  for (const auto& f : fixtures) {
    fs::path path = fs::path(dir) / f.file;
    if (!fs::exists(path)) {
      problem += std::string(" missing ") + f.file;
      continue;
    }
    cli::Config c;
    c.set("dataset.path", path.string());
    c.set("dataset.profile", f.profile);
    c.set("label.out", (out_dir / (std::string(f.profile) + ".labels.csv")).string());
    std::ostringstream sink;
    int code = cli::cmd_label(c, sink, sink);
    std::ifstream in(out_dir / (std::string(f.profile) + ".labels.csv"));
    auto labels = landmarks::read_labels_csv(in);
    if (code != 0 || labels.size() != f.knee_eol.size()) {
      problem += std::string(" ") + f.file + ": expected " + std::to_string(f.knee_eol.size()) +
                 " cells";
      continue;
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto& lm = labels[i].landmarks;
      checked += 2;
      within += lm.knee_cycle && std::abs(*lm.knee_cycle - f.knee_eol[i].first) <= 5;
      within += lm.eol_cycle && std::abs(*lm.eol_cycle - f.knee_eol[i].second) <= 5;
    }
  }
  verdict(5, "landmark fixtures", problem.empty() && checked == 32 && within == checked,
          std::to_string(within) + "/" + std::to_string(checked) + " labels within 5 cycles" +
              problem);
}

void matern_equivalence() {
  Rng rng(derive_stream(1, "acceptance.matern"));
  double worst = 0.0, worst_lib = 0.0;
  bool diag_exact = true;
  for (int i = 0; i < 100; ++i) {
    gpr::GprHyper h{rng.uniform(0.1, 5.0), rng.uniform(0.1, 10.0), 0.0};
    double r = rng.uniform(1e-3, 20.0);
    std::vector<double> a{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    std::vector<double> b{a[0] + r * std::cos(angle), a[1] + r * std::sin(angle)};
    double dist = std::hypot(b[0] - a[0], b[1] - a[1]);

    // sigma^2 2^(1-nu)/Gamma(nu) z^nu K_nu(z) with nu = 3/2, z = sqrt(2 nu) r / l.
    const double nu = 1.5;
    double z = std::sqrt(2.0 * nu) * dist / h.length_scale;
    double bessel = h.signal_variance * std::pow(2.0, 1.0 - nu) / std::tgamma(nu) *
                    std::pow(z, nu) * std::cyl_bessel_k(nu, z);
    double closed = gpr::matern32(a, b, h);
    worst = std::max(worst, std::abs(closed - bessel) / std::abs(bessel));
    worst_lib = std::max(worst_lib,
                         std::abs(closed - gpr::matern32_bessel_form(dist, h)) / std::abs(bessel));
    diag_exact &= gpr::matern32(a, a, h) == h.signal_variance;
  }
  verdict(6, "Matern equivalence", worst <= 1e-9 && worst_lib <= 1e-9 && diag_exact,
          fmt("max rel err %.3g (library Bessel form %.3g), k(x,x) exact: ", worst, worst_lib) +
              (diag_exact ? "yes" : "no"));
}

void gpr_interpolation() {
  Rng rng(derive_stream(1, "acceptance.gpr"));
  double worst = 0.0;
  int failed_fits = 0;
  for (int p = 0; p < 20; ++p) {
    std::vector<gpr::Row> rows(10, gpr::Row(3));
    std::vector<double> t(10);
    for (std::size_t i = 0; i < 10; ++i) {
      for (double& v : rows[i]) v = rng.uniform(0.0, 1.0);
      t[i] = rng.uniform(500.0, 1500.0);
    }
    try {
      auto m = gpr::GprModel::fit(rows, t, {0.5, 1e4, 1e-10});
      for (std::size_t i = 0; i < 10; ++i) {
        worst = std::max(worst, std::abs(m.predict(rows[i]).mean - t[i]) / std::abs(t[i]));
      }
    } catch (const Error&) {
      ++failed_fits;
    }
  }
  verdict(7, "GPR interpolation", failed_fits == 0 && worst <= 1e-4,
          fmt("20 problems, max rel err %.3g, failed fits %.0f", worst, failed_fits));
}

void cnn_gradient_check() {
  Rng rng(derive_stream(1, "acceptance.gradcheck"));
  double worst = 0.0;
  bool all = true;
  std::ostringstream d;
  for (int i = 0; i < 3; ++i) {
    cnn::CnnArch arch;
    arch.input_length = 6 + rng.index(7);
    std::size_t length = arch.input_length;
    std::size_t stages = 1 + rng.index(2);
    for (std::size_t s = 0; s < stages; ++s) {
      cnn::ConvStage st;
      st.kernel_width = length >= 5 && rng.uniform() < 0.3 ? 5 : (rng.uniform() < 0.2 ? 1 : 3);
      st.channels = 1 + static_cast<int>(rng.index(3));
      st.pool_width = length >= 4 && rng.uniform() < 0.5 ? 2 : 1;
      st.dropout = 0.0;
      length /= static_cast<std::size_t>(st.pool_width);
      arch.stages.push_back(st);
    }
    arch.dense_widths.clear();
    for (std::size_t h = rng.index(3); h > 0; --h) {
      arch.dense_widths.push_back(1 + static_cast<int>(rng.index(4)));
    }
    arch.dense_widths.push_back(1);
    std::vector<double> x(arch.input_length);
    for (double& v : x) v = rng.uniform(0.7, 1.1);
    auto rep = cnn::gradient_check(arch, x, rng.uniform(0.0, 1.0), 1e-4, 1000 + i);
    worst = std::max(worst, rep.max_relative_error);
    all &= rep.passed && rep.checked > 0;
    d << (i ? "; " : "") << "arch " << i << ": " << rep.checked << " checked, "
      << rep.excluded.size() << " at kinks";
  }
  verdict(8, "CNN gradient check", all && worst < 1e-4,
          fmt("max rel err %.3g; ", worst) + d.str());
}

void metric_pins() {
  std::vector<double> e{10, -10};
  std::vector<double> flat(8, 123.25);
  bool pass = eval::mae(e) == 10.0 && eval::effort_savings(15, 3) == 80.0 &&
              eval::effort_savings(30, 15) == 50.0 && eval::mae_cycle_average(flat) == 123.25;
  verdict(9, "metric pins", pass, "mae{+10,-10}, savings (15,3) (30,15), constant MAE_c.a.");
}

struct Bench {
  Dataset dataset;
  std::vector<landmarks::CellLabels> labels;
};

Bench make_bench(const testing::BenchmarkSpec& spec) {
  Bench b{testing::make_benchmark_dataset(spec), {}};
  b.labels = landmarks::label_dataset(b.dataset, 0.8);
  return b;
}

double eol_knee_r(std::span<const landmarks::CellLabels> labels, std::size_t* used = nullptr) {
  std::vector<double> eol, knee;
  for (const auto& l : labels) {
    if (l.landmarks.eol_cycle && l.landmarks.knee_cycle) {
      eol.push_back(*l.landmarks.eol_cycle);
      knee.push_back(*l.landmarks.knee_cycle);
    }
  }
  if (used) *used = eol.size();
  return eval::pearson(eol, knee);
}

void correlation_preservation(const Bench& bench) {
  std::size_t seed_n = 0;
  double r_seed = eol_knee_r(bench.labels, &seed_n);
  auto ranges = sdg::derive_ranges(sdg::pairwise_stats(bench.dataset, 500), 0.25);
  std::vector<double> rs;
  std::size_t min_used = std::numeric_limits<std::size_t>::max();
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    auto batch = sdg::generate_batch(bench.dataset.curves, ranges, 200,
                                     derive_stream(1, "acceptance.correlation", {trial}));
    Dataset syn{"syn", batch.curves, {}};
    auto labels = landmarks::label_dataset(syn, 0.8);
    std::size_t used = 0;
    rs.push_back(eol_knee_r(labels, &used));
    min_used = std::min(min_used, used);
  }
  double r_med = median(rs);
  verdict(10, "correlation preservation",
          seed_n == bench.dataset.curves.size() && r_seed >= 0.95 &&
              std::abs(r_med - r_seed) <= 0.05,
          fmt("seed r = %.4f, median synthetic r = %.4f over 10 trials", r_seed, r_med) +
              " (>= " + std::to_string(min_used) + " of 200 curves labeled)");
}

struct ArmMedians {
  double real = 0.0, mixed = 0.0, seconds = 0.0;
};

ArmMedians augmentation_medians(const Bench& bench) {
  auto t0 = Clock::now();
  auto ranges = sdg::derive_ranges(sdg::pairwise_stats(bench.dataset, 500), 0.25);
  eval::Scenario real;
  real.name = "real";
  real.kind = eval::ScenarioKind::SeedOnly;
  real.real_counts = {16};
  real.runs = 15;
  real.master_seed = 7;
  real.available_cycles = {100, 200, 300, 400};
  real.test_count = 8;
  eval::Scenario mixed = real;
  mixed.name = "mixed";
  mixed.kind = eval::ScenarioKind::PartialReplacement;
  mixed.real_counts = {8};
  mixed.total_count = 16;
  eval::HarnessOptions opts;
  opts.threads = 0;

  auto per_run = [&](const eval::Scenario& s) {
    auto rep = eval::run_scenario(bench.dataset, bench.labels, s, eval::ModelKind::Gpr, ranges, opts);
    std::vector<double> v;
    for (const auto& r : rep.steps[0].runs) v.push_back(eval::mae_cycle_average(r.mae_cycles));
    return median(v);
  };
  ArmMedians m;
  m.real = per_run(real);
  m.mixed = per_run(mixed);
  m.seconds = seconds_since(t0);
  return m;
}

void augmentation_effect(const Bench& bench) {
  auto m = augmentation_medians(bench);
  double rel = std::abs(m.mixed - m.real) / m.real;
  verdict(11, "augmentation effect", rel <= 0.25 && m.seconds < 300.0,
          fmt("median MAE_c.a.: 16 real %.1f, 8+8 synthetic %.1f cycles (rel diff %.3f)", m.real,
              m.mixed, rel) +
              fmt(", %.1f s", m.seconds));

  testing::BenchmarkSpec coupled;
  coupled.lifetime_coupling = 1.0;
  auto c = augmentation_medians(make_bench(coupled));
  std::printf("INFO          coupled benchmark (early fade tied to lifetime): 16 real %.1f, "
              "8+8 synthetic %.1f cycles (rel diff %.3f); not a criterion\n",
              c.real, c.mixed, std::abs(c.mixed - c.real) / c.real);
}

void throughput(const Bench& bench) {
  auto dir = scratch_dir("throughput");
  cli::Config c;
  c.set("dataset.path", write_csv(dir, bench.dataset).string());
  c.set("dataset.profile", "rwth");
  c.set("generate.count", "10000");
  c.set("seed", "12");
  c.set("out.dir", (dir / "out").string());
  std::ostringstream sink;
  double mean_len = 0.0;
  for (const auto& cv : bench.dataset.curves) mean_len += static_cast<double>(cv.size());
  mean_len /= static_cast<double>(bench.dataset.curves.size());

  auto t0 = Clock::now();
  int code = cli::cmd_generate(c, sink, sink);
  double t = seconds_since(t0);

  auto back = read_dataset_csv(dir / "out" / "synthetic.csv", 1.85);
  std::ifstream prov(dir / "out" / "provenance.jsonl");
  auto records = sdg::read_provenance_jsonl(prov);
  bool valid = code == 0 && back.rejected.empty() && back.dataset.curves.size() == 10000 &&
               records.size() == 10000;
  verdict(12, "throughput", valid && t < 10.0,
          fmt("10000 curves from 48 seeds (mean L %.0f) in %.2f s, outputs valid: ", mean_len, t) +
              (valid ? "yes" : "no"));
  fs::remove_all(dir);
}

std::string without_wall_clock(const fs::path& p) {
  std::ifstream in(p);
  auto j = nlohmann::ordered_json::parse(in);
  j.erase("wall_clock_seconds");
  return j.dump(2);
}

void determinism(const Bench& bench) {
  auto dir = scratch_dir("determinism");
  cli::Config c;
  c.set("dataset.path", write_csv(dir, bench.dataset).string());
  c.set("dataset.profile", "rwth");
  c.set("seed", "2024");
  c.set("out.dir", (dir / "out").string());
  c.set("scenario.arms", "real, mixed");
  c.set("scenario.runs", "3");
  c.set("scenario.test_count", "8");
  c.set("scenario.available_cycles", "100,300");
  c.set("scenario.real.kind", "seed-only");
  c.set("scenario.real.real_counts", "4,8");
  c.set("scenario.mixed.kind", "partial-replacement");
  c.set("scenario.mixed.real_counts", "2,4");
  c.set("scenario.mixed.total_count", "8");
  c.set("model.kind", "gpr, cnn");
  c.set("cnn.epochs", "20");

  const std::vector<std::string> reports{"real.gpr.json", "real.cnn.json", "mixed.gpr.json",
                                         "mixed.cnn.json"};
  std::ostringstream sink;
  int first_code = cli::cmd_experiment(c, sink, sink);
  std::vector<std::string> first;
  for (const auto& r : reports) {
    first.push_back(fs::exists(dir / "out" / r) ? without_wall_clock(dir / "out" / r) : "");
  }
  int second_code = cli::cmd_experiment(c, sink, sink);
  int same = 0;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    same += !first[i].empty() && fs::exists(dir / "out" / reports[i]) &&
            without_wall_clock(dir / "out" / reports[i]) == first[i];
  }
  verdict(13, "determinism", first_code == 0 && second_code == 0 && same == 4,
          std::to_string(same) + "/4 report JSONs identical across two runs (wall clock removed)");
  fs::remove_all(dir);
}

}  // namespace

int main() {
  auto guarded = [](int id, const std::string& name, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      verdict(id, name, false, std::string("threw: ") + e.what());
    }
  };
  guarded(1, "SDG identity", sdg_identity);
  guarded(2, "SDG algebra", sdg_algebra);
  guarded(3, "round trip", round_trip);
  guarded(4, "knee oracle", knee_oracle);
  guarded(5, "landmark fixtures", landmark_fixtures);
  guarded(6, "Matern equivalence", matern_equivalence);
  guarded(7, "GPR interpolation", gpr_interpolation);
  guarded(8, "CNN gradient check", cnn_gradient_check);
  guarded(9, "metric pins", metric_pins);

  Bench bench = make_bench({});
  guarded(10, "correlation preservation", [&] { correlation_preservation(bench); });
  guarded(11, "augmentation effect", [&] { augmentation_effect(bench); });
  guarded(12, "throughput", [&] { throughput(bench); });
  guarded(13, "determinism", [&] { determinism(bench); });

  std::printf("%s: %d criterion failure(s)\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
