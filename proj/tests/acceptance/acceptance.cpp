// Acceptance suite: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion passes, except those named with
// --allow-fail, which are still reported as FAIL but do not change the status.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "cli/scene.hpp"
#include "cli/sweep.hpp"
#include "pgptycho/forward.hpp"
#include "pgptycho/loss.hpp"
#include "pgptycho/metrics.hpp"
#include "pgptycho/noise.hpp"
#include "pgptycho/propagation.hpp"
#include "pgptycho/solver.hpp"

using namespace pgptycho;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  double limit_s;  // 0: no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Wirtinger gradients against central differences.

double total_loss(const Scenario& s, const std::vector<RealField>& measured, const LossKind& kind,
                  const RealField& variance) {
  double sum = 0.0;
  for (std::size_t i = 0; i < s.position_count(); ++i) {
    sum += evaluate_loss(kind, measured[i], predict_intensity(s, i), &variance).value;
  }
  return sum;
}

ComplexField object_gradient(const Scenario& s, const std::vector<RealField>& measured,
                             const LossKind& kind, const RealField& variance) {
  ComplexField g(s.object().shape(), s.object().pitch());
  for (std::size_t i = 0; i < s.position_count(); ++i) {
    const auto dL = evaluate_loss(kind, measured[i], predict_intensity(s, i), &variance).dL_dI;
    const auto gi = gradient_object(s, i, dL);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += gi[k];
  }
  return g;
}

Outcome gradient_check() {
  constexpr double pitch = 6.9e-6;
  const Shape obj{16, 16}, win{10, 10};
  const PropagatorSpec spec{561e-9, 2e-3, win, pitch};
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_int_distribution<std::ptrdiff_t> pos(0, 6);

  double worst = 0.0;
  int checked = 0;
  for (auto variant : {LossVariant::Poisson, LossVariant::Gaussian, LossVariant::Mixed}) {
    for (int trial = 0; trial < 3; ++trial) {
      ComplexField object(obj, pitch), probe(win, pitch);
      for (auto& z : object) z = std::polar(1.0 + 0.3 * n(rng), 0.8 * n(rng));
      for (auto& z : probe) z = {2.0 * n(rng), 2.0 * n(rng)};
      const Scenario truth(object, probe, {{pos(rng), pos(rng)}, {pos(rng), pos(rng)}}, spec);
      // Measurements from a perturbed object keep the gradient away from zero.
      ComplexField other = object;
      for (auto& z : other) z += complex_t(0.2 * n(rng), 0.2 * n(rng));
      const Scenario source = truth.with_object(other);
      std::vector<RealField> measured;
      for (std::size_t i = 0; i < 2; ++i) {
        auto f = predict_intensity(source, i);
        for (auto& v : f) v += 1.5 * n(rng);
        measured.push_back(std::move(f));
      }
      const RealField variance(win, pitch, 2.25);
      const LossKind kind{variant, false, 1e-12};

      const auto g = object_gradient(truth, measured, kind, variance);
      std::vector<std::size_t> covered;
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (std::abs(g[k]) > 0.0) covered.push_back(k);
      }
      std::shuffle(covered.begin(), covered.end(), rng);
      for (std::size_t c = 0; c < 16 && c < covered.size(); ++c) {
        const std::size_t k = covered[c];
        const bool imag = c % 2 == 1;
        const double h = 1e-6;
        ComplexField plus = object, minus = object;
        plus[k] += imag ? complex_t(0, h) : complex_t(h, 0);
        minus[k] -= imag ? complex_t(0, h) : complex_t(h, 0);
        const double fd = (total_loss(truth.with_object(plus), measured, kind, variance) -
                           total_loss(truth.with_object(minus), measured, kind, variance)) /
                          (2 * h);
        // Real-coordinate derivative is twice the Wirtinger component.
        const double an = 2.0 * (imag ? g[k].imag() : g[k].real());
        const double rel = std::abs(an - fd) / std::max({std::abs(fd), std::abs(an), 1e-12});
        worst = std::max(worst, rel);
        ++checked;
      }
    }
  }
  return {worst <= 1e-4 && checked >= 48,
          fmt("%d components over 3 losses, max relative error %.2e (limit 1e-4)", checked,
              worst)};
}

// ---------------------------------------------------------------------------
// 2-4. Noise, dark calibration and propagator.

Outcome noise_variance() {
  const auto model = NoiseModel::uniform({250, 400}, 6.9e-6, 1.5, 1.0, 0.0, 17);
  auto rng = stream_rng(17, 0);
  const auto frame = sample_frame(RealField({250, 400}, 6.9e-6, 100.0), model, rng);
  double s = 0.0, s2 = 0.0;
  for (double v : frame) s += v;
  const double mean = s / static_cast<double>(frame.size());
  for (double v : frame) s2 += (v - mean) * (v - mean);
  const double var = s2 / static_cast<double>(frame.size() - 1);
  const double rel = std::abs(var - 102.25) / 102.25;
  return {rel <= 0.02, fmt("variance %.3f vs 102.25 (%.2f%%, limit 2%%)", var, 100 * rel)};
}

Outcome dark_calibration() {
  const auto model = NoiseModel::uniform({64, 64}, 6.9e-6, 1.5, 1.0, 0.0, 23);
  const auto map = estimate_variance_map(sample_dark_stack(model, 300));
  double s = 0.0;
  for (double v : map) s += v;
  const double mean = s / static_cast<double>(map.size());
  const double rel = std::abs(mean - 2.25) / 2.25;
  return {rel <= 0.02, fmt("map mean %.4f vs 2.25 (%.2f%%, limit 2%%)", mean, 100 * rel)};
}

Outcome propagator_physics() {
  const Shape shape{256, 256};
  const auto fwd = build_propagator({561e-9, 37.7e-3, shape, 6.9e-6});
  const auto back = build_propagator({561e-9, -37.7e-3, shape, 6.9e-6});
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexField f(shape, 6.9e-6);
  for (auto& z : f) z = {n(rng), n(rng)};
  f = fwd.band_limit(f);
  const auto g = fwd.propagate(f);
  const double e_in = norm2(f), e_out = norm2(g);
  const double energy = std::abs(e_out * e_out - e_in * e_in) / (e_in * e_in);
  const auto r = back.propagate(g);
  double num = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) num += std::norm(r[k] - f[k]);
  const double roundtrip = std::sqrt(num) / e_in;
  return {energy <= 1e-10 && roundtrip <= 1e-10,
          fmt("energy error %.1e, round-trip error %.1e (limit 1e-10)", energy, roundtrip)};
}

// ---------------------------------------------------------------------------
// 5 and 7. Loss comparison sweep.

struct Stat {
  double mean = 0.0;
  double variance = 0.0;
  std::size_t n = 0;
};

using SweepTable = std::map<std::pair<double, cli::SweepVariant>, Stat>;

SweepTable tabulate(const std::vector<cli::SweepRow>& rows) {
  std::map<std::pair<double, cli::SweepVariant>, std::vector<double>> values;
  for (const auto& r : rows) values[{r.budget, r.variant}].push_back(r.correlation);
  SweepTable out;
  for (const auto& [key, v] : values) {
    Stat s;
    s.n = v.size();
    for (double c : v) s.mean += c;
    s.mean /= static_cast<double>(s.n);
    for (double c : v) s.variance += (c - s.mean) * (c - s.mean);
    if (s.n > 1) s.variance /= static_cast<double>(s.n - 1);
    out[key] = s;
  }
  return out;
}

struct SweepRun {
  cli::SweepSpec spec;
  std::vector<cli::SweepRow> rows;
  std::string csv;
  double seconds = 0.0;
};

SweepRun run_default_sweep(unsigned threads) {
  SweepRun run;
  run.spec.threads = threads;
  const auto t0 = std::chrono::steady_clock::now();
  run.rows = cli::run_sweep(run.spec);
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  run.csv = cli::sweep_csv(run.rows);
  return run;
}

std::vector<double> low_budgets(const cli::SweepSpec& spec, const SweepTable& t) {
  std::vector<double> out;
  for (double b : spec.budgets) {
    const double c = t.at({b, cli::SweepVariant::PoissonCrop}).mean;
    if (c >= 0.3 && c <= 0.9) out.push_back(b);
  }
  return out;
}

std::string describe_budget(double b, const SweepTable& t) {
  using V = cli::SweepVariant;
  return fmt("%.0e: P %.3f Mc %.3f Mr %.3f G %.3f", b, t.at({b, V::PoissonCrop}).mean,
             t.at({b, V::MixedCrop}).mean, t.at({b, V::MixedRaw}).mean, t.at({b, V::Gaussian}).mean);
}

Outcome sweep_highest(const SweepRun& run) {
  const auto t = tabulate(run.rows);
  const double b = run.spec.budgets.back();
  bool ok = b >= 1e9;
  std::string failing;
  for (auto v : run.spec.variants) {
    if (t.at({b, v}).mean < 0.99) {
      ok = false;
      failing += std::string(failing.empty() ? "" : ", ") + std::string(cli::to_string(v));
    }
  }
  return {ok, describe_budget(b, t) + (failing.empty() ? "" : "; below 0.99: " + failing)};
}

Outcome sweep_mixed_advantage(const SweepRun& run) {
  using V = cli::SweepVariant;
  const auto t = tabulate(run.rows);
  const auto low = low_budgets(run.spec, t);
  bool ok = !low.empty();
  std::string detail;
  for (double b : low) {
    const double gap = t.at({b, V::MixedRaw}).mean - t.at({b, V::PoissonCrop}).mean;
    ok = ok && gap >= 0.05;
    detail += fmt("%s%.0e: gap %+.3f", detail.empty() ? "" : "; ", b, gap);
  }
  return {ok, (low.empty() ? "no budget with Poisson C in [0.3, 0.9]" : detail) +
                  " (limit +0.05)"};
}

Outcome sweep_crop_between(const SweepRun& run) {
  using V = cli::SweepVariant;
  const auto t = tabulate(run.rows);
  const auto low = low_budgets(run.spec, t);
  bool ok = !low.empty();
  std::string detail;
  for (double b : low) {
    const auto& p = t.at({b, V::PoissonCrop});
    const auto& mc = t.at({b, V::MixedCrop});
    const auto& mr = t.at({b, V::MixedRaw});
    const double pooled = std::sqrt((p.variance + mc.variance + mr.variance) / 3.0 /
                                    static_cast<double>(p.n));
    const double lo = std::min(p.mean, mr.mean) - pooled;
    const double hi = std::max(p.mean, mr.mean) + pooled;
    ok = ok && mc.mean >= lo && mc.mean <= hi;
    detail += fmt("%s%.0e: %.3f in [%.3f, %.3f]", detail.empty() ? "" : "; ", b, mc.mean, lo, hi);
  }
  return {ok, low.empty() ? "no budget with Poisson C in [0.3, 0.9]" : detail};
}

Outcome sweep_gaussian_worst(const SweepRun& run) {
  using V = cli::SweepVariant;
  const auto t = tabulate(run.rows);
  const auto low = low_budgets(run.spec, t);
  bool ok = !low.empty();
  std::string detail;
  for (double b : low) {
    const double g = t.at({b, V::Gaussian}).mean, p = t.at({b, V::PoissonCrop}).mean;
    ok = ok && g <= p;
    detail += fmt("%s%.0e: G %.3f vs P %.3f", detail.empty() ? "" : "; ", b, g, p);
  }
  return {ok, low.empty() ? "no budget with Poisson C in [0.3, 0.9]" : detail};
}

// ---------------------------------------------------------------------------
// 6. Probe calibration on the default scene.

Outcome probe_calibration() {
  cli::SceneConfig scene;
  const auto acq = cli::simulate_acquisition(scene, 1e9, 1);
  ReconstructionConfig c;
  c.mode = ReconstructionMode::JointProbeObject;
  c.loss.variant = LossVariant::Poisson;
  c.regs.alpha = 100.0;
  c.regs.support_radius = 2.0 * scene.probe_radius_m;
  c.initial_probe_radius = scene.probe_radius_m;
  const auto result = calibrate_probe(acq.dataset, c);
  const double C = correlation(acq.probe, result.probe);
  return {C >= 0.95 && result.outside_fraction < kMaxOutsideSupportFraction,
          fmt("probe C %.4f (limit 0.95), outside-support energy %.2f%% (limit 5%%)", C,
              100.0 * result.outside_fraction)};
}

// ---------------------------------------------------------------------------
// 8. Learning-rate log and dominance flags.

Outcome schedule_and_dominance() {
  cli::SceneConfig scene;
  std::size_t reports = 0, epochs = 0, flagged = 0, mismatches = 0;
  const auto check = [&](const ReconstructionReport& r) {
    ++reports;
    for (const auto& e : r.epochs) {
      ++epochs;
      if (e.lr != 0.1 * std::exp(-0.03 * e.epoch)) ++mismatches;
      if (e.dominance_warning != (e.dominance_ratio < 100.0)) ++mismatches;
      flagged += e.dominance_warning;
    }
    if ((r.dominance_warning_count() > 0) == r.warnings.empty()) ++mismatches;
  };
  for (double photons : {1e3, 1e6}) {
    const auto acq = cli::simulate_acquisition(scene, photons, 3);
    for (auto v : {cli::SweepVariant::PoissonCrop, cli::SweepVariant::MixedCrop,
                   cli::SweepVariant::MixedRaw, cli::SweepVariant::Gaussian}) {
      ReconstructionConfig c;
      c.loss = cli::loss_for(v);
      c.initial_probe = acq.probe;
      check(reconstruct(acq.dataset, c));
    }
  }
  // Heavy regularization must trip the flag.
  const auto acq = cli::simulate_acquisition(scene, 1e3, 3);
  ReconstructionConfig heavy;
  heavy.loss = cli::loss_for(cli::SweepVariant::PoissonCrop);
  heavy.initial_probe = acq.probe;
  heavy.regs.gamma = 10.0;
  heavy.schedule.epochs = 5;
  const auto r = reconstruct(acq.dataset, heavy);
  check(r);
  const bool tripped = r.dominance_warning_count() == r.epochs.size();
  return {mismatches == 0 && tripped,
          fmt("%zu reports, %zu epochs, %zu mismatches, %zu flagged epochs", reports, epochs,
              mismatches, flagged)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-8"};
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::string> only, allow_fail;
  std::string csv_path;
  app.add_option("--threads", threads, "Concurrent sweep reconstructions");
  app.add_option("--only", only, "Run only these criterion ids (e.g. 1 4 5)");
  app.add_option("--allow-fail", allow_fail,
                 "Criterion ids whose failure is reported but does not fail the run");
  app.add_option("--sweep-csv", csv_path, "Write the sweep CSV here");
  CLI11_PARSE(app, argc, argv);

  const auto selected = [&](const std::string& id) {
    if (only.empty()) return true;
    const std::string group = id.substr(0, 1);
    return std::find(only.begin(), only.end(), id) != only.end() ||
           std::find(only.begin(), only.end(), group) != only.end();
  };

  std::optional<SweepRun> first, second;
  double sweep_seconds = 0.0;
  const auto sweep = [&]() -> const SweepRun& {
    if (!first) {
      first = run_default_sweep(threads);
      sweep_seconds = first->seconds;
      if (!csv_path.empty()) {
        std::FILE* f = std::fopen(csv_path.c_str(), "w");
        if (f) {
          std::fputs(first->csv.c_str(), f);
          std::fclose(f);
        }
      }
    }
    return *first;
  };

  const std::vector<Criterion> criteria{
      {"1", "gradient correctness", 30.0, gradient_check},
      {"2", "noise-model variance", 5.0, noise_variance},
      {"3", "dark calibration round trip", 10.0, dark_calibration},
      {"4", "propagator physics at 37.7 mm", 5.0, propagator_physics},
      {"5a", "highest budget, all variants C >= 0.99", 0.0, [&] { return sweep_highest(sweep()); }},
      {"5b", "low budgets, mixed+raw beats poisson+crop by 0.05", 0.0,
       [&] { return sweep_mixed_advantage(sweep()); }},
      {"5c", "low budgets, mixed+crop between the two", 0.0,
       [&] { return sweep_crop_between(sweep()); }},
      {"5d", "low budgets, gaussian not above poisson+crop", 0.0,
       [&] { return sweep_gaussian_worst(sweep()); }},
      {"5t", "sweep runtime", 0.0,
       [&] {
         sweep();
         return Outcome{sweep_seconds < 900.0,
                        fmt("%zu runs in %.1f s on %u thread(s) (limit 900 s)", first->rows.size(),
                            sweep_seconds, threads)};
       }},
      {"6", "probe calibration", 180.0, probe_calibration},
      {"7", "sweep determinism", 0.0,
       [&] {
         const auto& a = sweep();
         second = run_default_sweep(threads);
         return Outcome{a.csv == second->csv,
                        fmt("second sweep CSV %s (%zu bytes)",
                            a.csv == second->csv ? "byte-identical" : "differs", a.csv.size())};
       }},
      {"8", "schedule and dominance logging", 0.0, schedule_and_dominance},
  };

  int failures = 0, tolerated = 0;
  for (const auto& c : criteria) {
    if (!selected(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0.0 && s >= c.limit_s) {
      o.pass = false;
      o.detail += fmt(" [runtime %.1f s exceeds %.0f s]", s, c.limit_s);
    }
    std::printf("%s criterion %-3s %-52s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id.c_str(),
                c.title.c_str(), o.detail.c_str(), s);
    std::fflush(stdout);
    if (!o.pass) {
      const bool allowed = std::find(allow_fail.begin(), allow_fail.end(), c.id) != allow_fail.end();
      (allowed ? tolerated : failures) += 1;
    }
  }
  std::printf("%d failed, %d failed but allowed\n", failures, tolerated);
  return failures == 0 ? 0 : 1;
}
