#include <archinfty/asymptotics.hpp>

#include <gtest/gtest.h>

#include <cmath>

using archinfty::IndexWindow;
using archinfty::KernelSpec;
using archinfty::MomentSpec;
using archinfty::RatioKind;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kZeta3 = 1.2020569031595943;

double median_of(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

TEST(Periodic2Constants, ReproducesPublishedValues) {
  const auto c = archinfty::periodic2_constants(0.5, 0.25, 2.0, 1.0);
  EXPECT_NEAR(c.s0, kPi * kPi / 16.0, 1e-12);
  EXPECT_NEAR(c.s1, kPi * kPi / 96.0, 1e-12);
  EXPECT_NEAR(c.lam, 5.55073, 1e-4 * 5.55073);
  EXPECT_NEAR(c.t0, 6.14391, 1e-4 * 6.14391);
  EXPECT_NEAR(c.t1, 6.58015, 1e-4 * 6.58015);
  EXPECT_NEAR(c.d0, 4.71699, 1e-4 * 4.71699);
  EXPECT_NEAR(c.d1, 4.82605, 1e-4 * 4.82605);
  EXPECT_NEAR(c.tau0, 22.5498, 1e-4 * 22.5498);
  EXPECT_NEAR(c.ratio_even, 67.9375, 1e-4 * 67.9375);
  EXPECT_NEAR(c.ratio_odd, 34.1128, 1e-4 * 34.1128);
}

TEST(Periodic2Constants, InternalIdentities) {
  const auto c = archinfty::periodic2_constants(0.5, 0.25, 2.0, 1.0);
  EXPECT_NEAR(c.d0, c.a0 * c.t0 + c.a1 * c.t1, 1e-12);
  EXPECT_NEAR(c.tau0, c.t0 * c.sum_z_even + c.t1 * c.sum_z_odd, 1e-12);
  EXPECT_NEAR(c.sum_z_even + c.sum_z_odd, 1.0 / (1.0 - c.s0 - c.s1), 1e-12);
}

TEST(Periodic2Constants, SubsequentialLimitsDisagree) {
  // z(2n)/b(2n) -> 4 d0 while z(2n+1)/b(2n+1) -> 2 d1: a single limit
  // constant cannot exist for this kernel
  const auto c = archinfty::periodic2_constants(0.5, 0.25, 2.0, 1.0);
  EXPECT_GT(std::abs(4.0 * c.d0 - 2.0 * c.d1), 5.0);
  EXPECT_NEAR(4.0 * c.d0, 18.868, 1e-3 * 18.868);
  EXPECT_NEAR(2.0 * c.d1, 9.652, 1e-3 * 9.652);
}

TEST(Periodic2Constants, EqualScalesDegenerateSymmetrically) {
  const auto c = archinfty::periodic2_constants(0.4, 0.4, 2.0, 0.5);
  EXPECT_NEAR(c.d0, c.d1, 1e-12);
  EXPECT_NEAR(c.ratio_even, c.ratio_odd, 1e-12);
}

TEST(Periodic2Constants, RejectsSupercriticalSum) {
  // a0 = a1 = 1, alpha = 2: S0 + S1 = pi^2/6 > 1
  EXPECT_THROW(archinfty::periodic2_constants(1.0, 1.0, 2.0, 1.0), archinfty::hypothesis_error);
}

TEST(Periodic2Constants, NumericResolventConfirmsParityLimits) {
  const auto c = archinfty::periodic2_constants(0.5, 0.25, 2.0, 1.0);
  const auto rs = archinfty::compute_resolvent(archinfty::periodic2_kernel(0.5, 0.25, 2.0), 1.0, 20000);
  std::vector<double> even, odd;
  for (std::int64_t n = 16000; n <= 20000; ++n) {
    const double phi = std::pow(static_cast<double>(n), -2.0);
    (n % 2 == 0 ? even : odd).push_back(rs.z[static_cast<std::size_t>(n)] / phi);
  }
  EXPECT_NEAR(median_of(even), c.d0, 0.03 * c.d0);
  EXPECT_NEAR(median_of(odd), c.d1, 0.03 * c.d1);
}

TEST(Periodic3Constants, FinitePositiveAndConsistent) {
  const auto c = archinfty::periodic3_constants(0.5);
  EXPECT_NEAR(c.s0 + c.s1, 0.5 * 4.0 * kPi * kPi / 27.0, 1e-12);
  EXPECT_GT(c.k_factor, 0.0);
  for (int i = 0; i < 3; ++i) {
    EXPECT_TRUE(std::isfinite(c.d[static_cast<std::size_t>(i)]));
    EXPECT_TRUE(std::isfinite(c.c[static_cast<std::size_t>(i)]));
    EXPECT_GT(c.c[static_cast<std::size_t>(i)], 0.0);
  }
  EXPECT_GT(c.liminf_z_over_phi, 0.0);
  EXPECT_GT(c.liminf_chi_over_phi, 0.0);
  EXPECT_GE(c.limsup_chi_over_phi, c.liminf_chi_over_phi);
  // class sums of z add up to the full sum 1/(1 - S0 - S1)
  EXPECT_NEAR(c.sum_z_class[0] + c.sum_z_class[1] + c.sum_z_class[2], 1.0 / (1.0 - c.s0 - c.s1), 1e-12);
}

TEST(Periodic3Constants, NearZeroClassSumsCollapseThePolynomials) {
  // as lambda1 -> 0 the class polynomials approach (0, 1, 1)
  const auto c = archinfty::periodic3_constants(1e-4);
  EXPECT_NEAR(c.d[0], 0.0, 5e-4);
  EXPECT_NEAR(c.d[1], 1.0, 5e-4);
  EXPECT_NEAR(c.d[2], 1.0, 5e-4);
}

TEST(Periodic3Constants, RejectsSupercriticalRate) {
  EXPECT_THROW(archinfty::periodic3_constants(27.0 / (4.0 * kPi * kPi) + 0.01), archinfty::hypothesis_error);
  EXPECT_THROW(archinfty::periodic3_constants(-0.1), std::invalid_argument);
}

TEST(Periodic3Constants, NumericResolventConfirmsClassLimits) {
  const auto c = archinfty::periodic3_constants(0.5);
  const auto rs = archinfty::compute_resolvent(archinfty::periodic3_kernel(), 0.5, 60000);
  std::vector<std::vector<double>> classes(3);
  for (std::int64_t n = 48000; n <= 60000; ++n) {
    const double phi = std::pow(static_cast<double>(n), -2.0);
    classes[static_cast<std::size_t>(n % 3)].push_back(rs.z[static_cast<std::size_t>(n)] / phi);
  }
  for (int i = 0; i < 3; ++i) {
    const double target = c.k_factor * c.d[static_cast<std::size_t>(i)];
    EXPECT_NEAR(median_of(classes[static_cast<std::size_t>(i)]), target, 0.04 * target) << "class " << i;
  }

  // chi inherits the same K factor through the class sums of z; the bare
  // class polynomials would be off by a factor of K here
  std::vector<std::vector<double>> chi_classes(3);
  for (std::int64_t n = 24000; n <= 30000; ++n) {
    const double phi = std::pow(static_cast<double>(n), -2.0);
    chi_classes[static_cast<std::size_t>(n % 3)].push_back(archinfty::chi_z(rs, n) / phi);
  }
  for (int i = 0; i < 3; ++i) {
    const double target = c.k_factor * c.c[static_cast<std::size_t>(i)];
    EXPECT_NEAR(median_of(chi_classes[static_cast<std::size_t>(i)]), target, 0.02 * target) << "chi class " << i;
  }
}

TEST(RatioLimit, PowerLawRatiosHitTargets) {
  const auto kernel = KernelSpec::power_law(0.1, 3.0);
  const MomentSpec m(1.0, 2.0, 1.0);
  const auto rs = archinfty::compute_resolvent(kernel, 1.0, 4000);
  const IndexWindow w{1600, 2000};

  const auto zb = archinfty::ratio_limit_check(RatioKind::z_over_b, kernel, m, rs, 1.0, w);
  const double den = 1.0 - 0.1 * kZeta3;
  EXPECT_NEAR(zb.target, 1.0 / (den * den), 1e-6);
  EXPECT_LT(zb.rel_err, 0.02);

  const auto cz = archinfty::ratio_limit_check(RatioKind::chi_over_z, kernel, m, rs, 1.0, w);
  EXPECT_NEAR(cz.target, 1.0 / den, 1e-6);
  EXPECT_LT(cz.rel_err, 0.02);

  const auto rb = archinfty::ratio_limit_check(RatioKind::rho_over_b, kernel, m, rs, 1.0, w);
  const auto scalars = archinfty::process_scalars(kernel, m, rs);
  EXPECT_NEAR(rb.target, scalars.e_nu_sq * 1.0 / (den * den * den), 1e-5);
  EXPECT_LT(rb.rel_err, 0.02);
}

TEST(RatioLimit, ErrorShrinksAsWindowMovesOut) {
  const auto kernel = KernelSpec::power_law(0.1, 3.0);
  const MomentSpec m(1.0, 2.0, 1.0);
  const auto rs = archinfty::compute_resolvent(kernel, 1.0, 4000);
  const auto near = archinfty::ratio_limit_check(RatioKind::z_over_b, kernel, m, rs, 1.0, {400, 600});
  const auto far = archinfty::ratio_limit_check(RatioKind::z_over_b, kernel, m, rs, 1.0, {3200, 4000});
  EXPECT_LT(far.rel_err, near.rel_err);
}

TEST(RatioLimit, GuardsHypothesisAndEmptyWindows) {
  const MomentSpec m(1.0, 2.0, 1.0);
  const auto heavy = KernelSpec::table({1.2});
  const auto rs_heavy = archinfty::compute_resolvent(heavy, 1.0, 50);
  EXPECT_THROW(archinfty::ratio_limit_check(RatioKind::z_over_b, heavy, m, rs_heavy, 1.0, {10, 40}),
               archinfty::hypothesis_error);

  const auto single = KernelSpec::table({0.5});
  const auto rs = archinfty::compute_resolvent(single, 1.0, 50);
  // b vanishes beyond lag 1, so the window has no valid ratio points
  EXPECT_THROW(archinfty::ratio_limit_check(RatioKind::z_over_b, single, m, rs, 1.0, {10, 40}),
               std::domain_error);
}

TEST(RatioLimit, PeriodicKernelReportsClassMedians) {
  const auto kernel = archinfty::periodic2_kernel(0.5, 0.25, 2.0);
  const MomentSpec m(1.0, 1.5, 1.0);
  const auto rs = archinfty::compute_resolvent(kernel, 1.0, 4000);
  const auto zb = archinfty::ratio_limit_check(RatioKind::z_over_b, kernel, m, rs, 1.0, {3000, 4000});
  ASSERT_EQ(zb.class_medians.size(), 2u);
  const auto c = archinfty::periodic2_constants(0.5, 0.25, 2.0, 1.0);
  EXPECT_NEAR(zb.class_medians[0], 4.0 * c.d0, 0.05 * 4.0 * c.d0);
  EXPECT_NEAR(zb.class_medians[1], 2.0 * c.d1, 0.05 * 2.0 * c.d1);
}

TEST(LogLogSlope, OscillatingCubicDecay) {
  const auto fit = archinfty::loglog_slope(
      [](std::int64_t n) {
        return (2.0 + std::cos(static_cast<double>(n) * kPi)) * std::pow(static_cast<double>(n), -3.0);
      },
      {1000, 10000});
  EXPECT_NEAR(fit.slope, -3.0, 0.05);
  EXPECT_GT(fit.sup_statistic, fit.slope);
  EXPECT_LT(fit.sup_statistic, -2.7);
}

TEST(LogLogSlope, PureQuadraticIsExact) {
  const auto fit = archinfty::loglog_slope(
      [](std::int64_t n) { return std::pow(static_cast<double>(n), -2.0); }, {100, 2000});
  EXPECT_NEAR(fit.slope, -2.0, 1e-10);
  EXPECT_LT(fit.rms_residual, 1e-6);
  EXPECT_EQ(fit.excluded, 0);
}

TEST(LogLogSlope, SteepDecayFlaggedSuperpolynomial) {
  const auto fit = archinfty::loglog_slope(
      [](std::int64_t n) { return std::exp(-static_cast<double>(n)); }, {10, 200});
  EXPECT_TRUE(fit.superpolynomial);
  const auto poly = archinfty::loglog_slope(
      [](std::int64_t n) { return std::pow(static_cast<double>(n), -2.0); }, {10, 200});
  EXPECT_FALSE(poly.superpolynomial);
}

TEST(RatioLimit, SummedAutocovarianceMatchesClosedFormRoute) {
  // the rho/b target uses lambda1 E[nu^2] / (1 - lambda1 B)^3 instead of
  // summing rho; the two routes agree because the two-sided sum of rho
  // collapses to E[nu^2] (sum z)^2
  const auto kernel = KernelSpec::geometric(0.6, 0.5);
  const MomentSpec m(0.8, 1.0, 1.0);
  const auto rs = archinfty::compute_resolvent(kernel, 0.8, 600);
  const auto rep = archinfty::autocovariance(kernel, m, rs, 300);
  long double two_sided = rep.rho_at(0);
  for (std::int64_t j = 1; j <= 300; ++j) two_sided += 2.0L * rep.rho_at(-j);
  const double b_mid = weighted_kernel_sum(kernel, 1.0, 600).midpoint();
  const double z_sum = 1.0 / (1.0 - m.lambda1 * b_mid);
  EXPECT_NEAR(static_cast<double>(two_sided), rep.e_nu_sq * z_sum * z_sum,
              1e-9 * static_cast<double>(two_sided));
  // and the limit target written both ways
  const auto rb = archinfty::ratio_limit_check(RatioKind::rho_over_b, kernel, m, rs, 1.0, {400, 600});
  EXPECT_NEAR(rb.target, m.lambda1 * static_cast<double>(two_sided) / (1.0 - m.lambda1 * b_mid),
              1e-8 * rb.target);
}

TEST(LogLogSlope, SkipsZeroEntriesAndCountsThem) {
  const auto kernel = archinfty::periodic3_kernel();
  const auto fit = archinfty::loglog_slope([&](std::int64_t n) { return kernel(n); }, {300, 3000});
  EXPECT_NEAR(fit.slope, -2.0, 0.01);
  EXPECT_EQ(fit.excluded, 901);  // multiples of 3 in [300, 3000]
  EXPECT_THROW(archinfty::loglog_slope([](std::int64_t) { return 0.0; }, {10, 50}), std::domain_error);
}

TEST(GeometricFit, ExactGeometricSequence) {
  const auto fit = archinfty::geometric_fit(
      [](std::int64_t k) { return 8.0 * std::pow(0.5, static_cast<double>(k)); }, {0, 40});
  EXPECT_NEAR(fit.rate, 0.5, 1e-10);
  EXPECT_NEAR(fit.scale, 8.0, 1e-8);
  EXPECT_LT(fit.max_positive_residual, 1e-10);
  EXPECT_TRUE(fit.ok);
}

TEST(GeometricFit, PolynomialDecayIsNotGeometric) {
  const auto fit = archinfty::geometric_fit(
      [](std::int64_t n) { return std::pow(static_cast<double>(n), -2.0); }, {100, 1000});
  EXPECT_FALSE(fit.ok);
  EXPECT_GT(fit.max_positive_residual, 0.05);
}

TEST(BoundRatioSup, SelfRatioIsOne) {
  const auto one = [](std::int64_t n) { return 1.0 / static_cast<double>(n); };
  const auto out = archinfty::bound_ratio_sup(one, one, {5, 50});
  EXPECT_DOUBLE_EQ(out.sup_ratio, 1.0);
}

TEST(BoundRatioSup, SingleLagAgainstScaledGeometric) {
  // rho(n) = 8 * 0.5^n and gamma(n) = (4/3) 0.5^n give the constant E[nu^2] = 6
  const auto kernel = KernelSpec::table({0.5});
  const MomentSpec m(1.0, 2.0, 1.0);
  const auto rs = archinfty::compute_resolvent(kernel, 1.0, 80);
  const auto rep = archinfty::autocovariance(kernel, m, rs, 30);
  const auto out = archinfty::bound_ratio_sup(
      [&](std::int64_t n) { return rep.rho[static_cast<std::size_t>(n)]; },
      [](std::int64_t n) { return (4.0 / 3.0) * std::pow(0.5, static_cast<double>(n)); }, {0, 30});
  EXPECT_NEAR(out.sup_ratio, 6.0, 1e-9);
}

TEST(BoundRatioSup, ThreePeriodicLowerBoundDoesNotTransferToKernel) {
  // rho stays bounded below by a multiple of n^-2 even though b vanishes on
  // every third index: lower bounds on the autocovariance do not imply lower
  // bounds on the kernel
  const auto kernel = archinfty::periodic3_kernel();
  const MomentSpec m(0.5, 0.4, 1.0);
  const auto rs = archinfty::compute_resolvent(kernel, 0.5, 6000);
  const auto scalars = archinfty::process_scalars(kernel, m, rs);
  double rho_min = archinfty::kInf, b_min = archinfty::kInf;
  for (std::int64_t n = 2000; n <= 3000; ++n) {
    const double phi = std::pow(static_cast<double>(n), -2.0);
    rho_min = std::min(rho_min, scalars.e_nu_sq * archinfty::chi_z(rs, n) / phi);
    b_min = std::min(b_min, kernel(n) / phi);
  }
  EXPECT_GT(rho_min, 0.1);
  EXPECT_DOUBLE_EQ(b_min, 0.0);
  // while the sup ratio stays finite, matching the two-sided statement
  const auto sup = archinfty::bound_ratio_sup(
      [&](std::int64_t n) { return scalars.e_nu_sq * archinfty::chi_z(rs, n); },
      [](std::int64_t n) { return std::pow(static_cast<double>(n), -2.0); }, {2000, 3000});
  EXPECT_TRUE(std::isfinite(sup.sup_ratio));
  EXPECT_GT(sup.sup_ratio, 0.0);
}

TEST(DecayDiagnostics, PowerLawBundle) {
  const auto kernel = KernelSpec::power_law(0.1, 3.0);
  const MomentSpec m(1.0, 2.0, 1.0);
  const auto rs = archinfty::compute_resolvent(kernel, 1.0, 3000);
  const auto diag = archinfty::decay_diagnostics(kernel, m, rs);
  EXPECT_TRUE(diag.z_over_b_ok);
  EXPECT_TRUE(diag.chi_over_z_ok);
  EXPECT_TRUE(diag.rho_over_b_ok);
  EXPECT_NEAR(diag.rho_loglog.slope, -3.0, 0.15);
  EXPECT_FALSE(diag.rho_geometric.ok);
  EXPECT_TRUE(diag.kernel_wr_valid);
  EXPECT_EQ(diag.kernel_wr.verdict, archinfty::WrVerdict::CONSISTENT);
  EXPECT_FALSE(diag.series_z_over_b.empty());
}

}  // namespace
