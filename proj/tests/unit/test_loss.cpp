#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "pgptycho/errors.hpp"
#include "pgptycho/loss.hpp"
#include "test_support.hpp"

using namespace pgptycho;
using pgptycho::testing::random_complex;
using pgptycho::testing::random_real;

namespace {

RealField pixel(double v) { return RealField({1, 1}, 1.0, v); }

// Golden-section search for the minimum of a unimodal f on [a, b].
double golden_section(const std::function<double(double)>& f, double a, double b) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  for (int i = 0; i < 200; ++i) {
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - invphi * (b - a);
    d = a + invphi * (b - a);
  }
  return 0.5 * (a + b);
}

double mixed_value(double x, double i, double s) {
  return loss_mixed(pixel(x), pixel(i), pixel(s)).value;
}

}  // namespace

TEST(LossPoisson, PerfectFitIsZero) {
  const auto I = random_real({4, 5}, 1, 0.1, 50.0);
  const auto r = loss_poisson(I, I);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
  for (double g : r.dL_dI) EXPECT_NEAR(g, 0.0, 1e-12);
}

TEST(LossPoisson, SinglePixel) {
  const auto r = loss_poisson(pixel(4.0), pixel(1.0));
  EXPECT_DOUBLE_EQ(r.value, 1.0);
  EXPECT_DOUBLE_EQ(r.dL_dI[0], -1.0);
}

TEST(LossPoisson, NegativeMeasurementIsCropped) {
  const auto r = loss_poisson(pixel(-3.0), pixel(2.5));
  EXPECT_DOUBLE_EQ(r.value, 2.5);
  EXPECT_DOUBLE_EQ(r.dL_dI[0], 1.0);
}

TEST(LossPoisson, NegativePredictionIsDomainError) {
  EXPECT_THROW(loss_poisson(pixel(1.0), pixel(-1e-3)), DomainError);
}

TEST(LossPoisson, GuardKeepsGradientFiniteAtZero) {
  const auto r = loss_poisson(pixel(4.0), pixel(0.0));
  EXPECT_TRUE(std::isfinite(r.dL_dI[0]));
  EXPECT_LT(r.dL_dI[0], 0.0);
}

TEST(LossGaussian, Examples) {
  const auto r = loss_gaussian(pixel(3.0), pixel(1.0));
  EXPECT_DOUBLE_EQ(r.value, 4.0);
  EXPECT_DOUBLE_EQ(r.dL_dI[0], -4.0);
  const auto I = random_real({3, 3}, 2, 0.0, 9.0);
  EXPECT_DOUBLE_EQ(loss_gaussian(I, I).value, 0.0);
}

TEST(LossGaussian, SymmetricInArguments) {
  const auto a = random_real({6, 4}, 3, 0.0, 10.0);
  const auto b = random_real({6, 4}, 4, 0.0, 10.0);
  EXPECT_DOUBLE_EQ(loss_gaussian(a, b).value, loss_gaussian(b, a).value);
}

TEST(LossMixed, SinglePixelWithReadoutVariance) {
  const auto r = loss_mixed(pixel(0.0), pixel(1.0), pixel(2.25));
  EXPECT_NEAR(r.value, std::log(3.25) + 1.0 / 3.25, 1e-15);
}

TEST(LossMixed, PerfectFitLeavesLogTerm) {
  const auto I = random_real({5, 5}, 5, 0.0, 100.0);
  const RealField s({5, 5}, 1e-6, 2.25);
  const auto r = loss_mixed(I, I, s);
  double expected = 0.0;
  for (double v : I) expected += std::log(v + 2.25);
  EXPECT_NEAR(r.value, expected, 1e-12 * std::abs(expected));
  for (std::size_t k = 0; k < I.size(); ++k) {
    EXPECT_NEAR(r.dL_dI[k], 1.0 / (I[k] + 2.25), 1e-15);
    EXPECT_GT(r.dL_dI[k], 0.0);
  }
}

TEST(LossMixed, RequiresPositiveVariance) {
  EXPECT_THROW(loss_mixed(pixel(1.0), pixel(1.0), pixel(0.0)), DomainError);
}

TEST(LossMixed, AcceptsNegativeMeasurements) {
  const auto r = loss_mixed(pixel(-2.0), pixel(0.5), pixel(2.25));
  EXPECT_NEAR(r.value, std::log(2.75) + 6.25 / 2.75, 1e-14);
}

TEST(Loss, DerivativesMatchScalarFiniteDifferences) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.5, 80.0);
  std::uniform_real_distribution<double> xs(-5.0, 80.0);
  for (int n = 0; n < 50; ++n) {
    const double x = xs(rng), i = u(rng), s = 0.5 + u(rng) / 20.0;
    const double h = 1e-5 * i;
    const auto check = [&](const std::function<LossResult(double)>& f) {
      const double fd = (f(i + h).value - f(i - h).value) / (2.0 * h);
      const double an = f(i).dL_dI[0];
      EXPECT_NEAR(an, fd, 1e-8 * std::max(1.0, std::abs(fd))) << "x=" << x << " I=" << i;
    };
    check([&](double v) { return loss_poisson(pixel(x), pixel(v)); });
    check([&](double v) { return loss_gaussian(pixel(x), pixel(v)); });
    check([&](double v) { return loss_mixed(pixel(x), pixel(v), pixel(s)); });
  }
}

TEST(Loss, PoissonAndGaussianMinimizedAtMeasurement) {
  for (double x : {0.0, 0.3, 4.0, 250.0}) {
    const double best_p = loss_poisson(pixel(x), pixel(x)).value;
    const double best_g = loss_gaussian(pixel(x), pixel(x)).value;
    for (double i : {0.0, 0.5 * x, 0.9 * x + 0.01, 1.1 * x + 0.1, 3.0 * x + 1.0}) {
      if (i == x) continue;
      EXPECT_GT(loss_poisson(pixel(x), pixel(i)).value, best_p);
      EXPECT_GT(loss_gaussian(pixel(x), pixel(i)).value, best_g);
    }
  }
}

TEST(LossMixed, StationaryPointMatchesGoldenSectionOracle) {
  for (double x : {0.5, 3.0, 40.0, 900.0}) {
    for (double s : {0.25, 2.25, 10.0}) {
      const double oracle =
          golden_section([&](double i) { return mixed_value(x, i, s); }, 0.0, 4.0 * x + 10.0);
      // Setting the derivative to zero gives t (1 + t) = (x + s)^2 with t = I + s.
      const double t = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * (x + s) * (x + s)));
      EXPECT_NEAR(oracle, t - s, 1e-6 * (1.0 + t));
    }
  }
}

TEST(LossMixed, SmallVarianceMatchesPoissonMinimizer) {
  for (double x : {50.0, 400.0, 1e4}) {
    const double i_star =
        golden_section([&](double i) { return mixed_value(x, i, 1e-9); }, 0.5 * x, 1.5 * x);
    // The log term pulls the minimizer half a count below the Poisson optimum I* = x.
    EXPECT_NEAR(i_star, x - 0.5, 0.01);
    EXPECT_LT(std::abs(i_star - x) / x, 0.011);
  }
}

TEST(Loss, ZeroCropDoesNotChangeNonNegativeData) {
  const auto X = random_real({4, 4}, 8, 0.0, 30.0);
  const auto I = random_real({4, 4}, 9, 0.1, 30.0);
  const RealField s({4, 4}, 1e-6, 2.25);
  for (auto variant : {LossVariant::Poisson, LossVariant::Gaussian, LossVariant::Mixed}) {
    const auto a = evaluate_loss({variant, false}, X, I, &s);
    const auto b = evaluate_loss({variant, true}, X, I, &s);
    EXPECT_DOUBLE_EQ(a.value, b.value);
  }
}

TEST(Loss, MixedWithoutVarianceIsConfigError) {
  EXPECT_THROW(evaluate_loss({LossVariant::Mixed, false}, pixel(1.0), pixel(1.0), nullptr),
               ConfigError);
}

TEST(Loss, VariantNamesRoundTrip) {
  for (auto v : {LossVariant::Poisson, LossVariant::Gaussian, LossVariant::Mixed}) {
    EXPECT_EQ(parse_loss_variant(to_string(v)), v);
  }
  EXPECT_THROW(parse_loss_variant("cauchy"), ConfigError);
}

// --- regularizers --------------------------------------------------------

namespace {

template <typename Reg>
void check_regularizer_gradient(const ComplexField& z, Reg reg) {
  const auto term = reg(z);
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<std::size_t> pick(0, z.size() - 1);
  const double h = 1e-6;
  for (int n = 0; n < 16; ++n) {
    const std::size_t k = pick(rng);
    const bool imag = n % 2 == 1;
    ComplexField plus = z, minus = z;
    plus[k] += imag ? complex_t(0, h) : complex_t(h, 0);
    minus[k] -= imag ? complex_t(0, h) : complex_t(h, 0);
    const double fd = (reg(plus).value - reg(minus).value) / (2 * h);
    const double an = imag ? term.gradient[k].imag() : term.gradient[k].real();
    EXPECT_NEAR(an, fd, 1e-6 * std::max(1e-3, std::abs(fd)));
  }
}

}  // namespace

TEST(Regularizers, SupportTermVanishesForConfinedProbe) {
  const double pitch = 1e-5;
  ComplexField probe({16, 16}, pitch);
  const auto inside = disc_mask(probe.shape(), pitch, 5e-5);
  for (std::size_t k = 0; k < probe.size(); ++k) probe[k] = inside[k] ? complex_t(2.0, 1.0) : 0.0;
  const auto t = reg_probe_support(probe, 5e-5, 100.0, 1e-8);
  const std::size_t outside = probe.size() - std::count(inside.begin(), inside.end(), 1);
  EXPECT_LE(t.value, 100.0 * static_cast<double>(outside) * 1e-8 * 1.0001);
  for (std::size_t k = 0; k < probe.size(); ++k) {
    if (inside[k]) EXPECT_EQ(t.gradient[k], complex_t(0.0));
  }
}

TEST(Regularizers, SupportTermIsHomogeneous) {
  const double pitch = 1e-5;
  const auto probe = random_complex({12, 12}, 11, pitch);
  ComplexField doubled = probe;
  const auto inside = disc_mask(probe.shape(), pitch, 3e-5);
  for (std::size_t k = 0; k < probe.size(); ++k) {
    if (!inside[k]) doubled[k] *= 2.0;
  }
  const double a = reg_probe_support(probe, 3e-5, 1.0, 1e-12).value;
  const double b = reg_probe_support(doubled, 3e-5, 1.0, 1e-12).value;
  EXPECT_NEAR(b, 2.0 * a, 1e-9 * a);
}

TEST(Regularizers, AmplitudeExamples) {
  // The smoothed modulus leaves beta * eps per pixel.
  EXPECT_NEAR(reg_object_amplitude(ComplexField({4, 4}, 1.0), 1e-4, 1e-8).value, 0.0, 1e-10);
  ComplexField one({1, 1}, 1.0, complex_t(3.0, 4.0));
  EXPECT_NEAR(reg_object_amplitude(one, 1e-4).value, 5e-4, 1e-12);
  const auto z = random_complex({6, 6}, 12);
  ComplexField r = z;
  for (auto& v : r) v *= std::polar(1.0, 2.2);
  EXPECT_NEAR(reg_object_amplitude(z, 0.1).value, reg_object_amplitude(r, 0.1).value, 1e-12);
}

TEST(Regularizers, FourierExamples) {
  EXPECT_NEAR(reg_object_fourier(ComplexField({4, 4}, 1.0), 1e-3, 1e-8).value, 0.0, 1e-9);
  const complex_t c(0.6, -0.8);
  const ComplexField constant({8, 6}, 1.0, c);
  const double expected = 1e-3 * std::abs(c) * std::sqrt(48.0);
  EXPECT_NEAR(reg_object_fourier(constant, 1e-3, 1e-12).value, expected, 1e-9 * expected);
}

TEST(Regularizers, GradientsMatchFiniteDifferences) {
  const double pitch = 1e-5;
  const auto z = random_complex({8, 8}, 13, pitch);
  check_regularizer_gradient(z, [](const ComplexField& f) {
    return reg_probe_support(f, 2.5e-5, 3.0, 1e-8);
  });
  check_regularizer_gradient(z, [](const ComplexField& f) {
    return reg_object_amplitude(f, 0.7, 1e-8);
  });
  check_regularizer_gradient(z, [](const ComplexField& f) {
    return reg_object_fourier(f, 0.9, 1e-8);
  });
}

TEST(Regularizers, DominanceRatio) {
  const double five[] = {2.0, 3.0};
  EXPECT_DOUBLE_EQ(fidelity_dominance_ratio(1000.0, five), 200.0);
  EXPECT_FALSE(dominance_warning(fidelity_dominance_ratio(1000.0, five)));
  const double one[] = {1.0};
  EXPECT_DOUBLE_EQ(fidelity_dominance_ratio(50.0, one), 50.0);
  EXPECT_TRUE(dominance_warning(fidelity_dominance_ratio(50.0, one)));
  const double none[] = {0.0, 0.0, 0.0};
  const double r = fidelity_dominance_ratio(3.0, none);
  EXPECT_EQ(r, std::numeric_limits<double>::infinity());
  EXPECT_FALSE(dominance_warning(r));
}
