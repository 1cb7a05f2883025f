#include <archinfty/autocovariance.hpp>

#include <gtest/gtest.h>

#include <cmath>

#include <archinfty/asymptotics.hpp>

using archinfty::AutocovReport;
using archinfty::KernelSpec;
using archinfty::MomentSpec;

namespace {

TEST(ChiZ, SingleLagGeometric) {
  const auto rs = archinfty::compute_resolvent(KernelSpec::table({0.5}), 1.0, 60);
  EXPECT_NEAR(archinfty::chi_z(rs, 0), 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(archinfty::chi_z(rs, 2), 1.0 / 3.0, 1e-12);
  for (std::int64_t k = 0; k <= 10; ++k)
    EXPECT_NEAR(archinfty::chi_z(rs, k), (4.0 / 3.0) * std::pow(0.5, static_cast<double>(k)), 1e-12);
}

TEST(ChiZ, ZeroKernel) {
  const auto rs = archinfty::compute_resolvent(KernelSpec::zero(), 1.0, 20);
  EXPECT_DOUBLE_EQ(archinfty::chi_z(rs, 0), 1.0);
  for (std::int64_t k = 1; k <= 20; ++k) EXPECT_DOUBLE_EQ(archinfty::chi_z(rs, k), 0.0);
}

TEST(ChiZ, LagBeyondHorizonIsAnError) {
  const auto rs = archinfty::compute_resolvent(KernelSpec::table({0.5}), 1.0, 20);
  EXPECT_THROW(archinfty::chi_z(rs, 21), archinfty::horizon_error);
  EXPECT_THROW(archinfty::chi_z(rs, -1), std::invalid_argument);
}

TEST(ChiZ, AtLagZeroDominatesOne) {
  // chi(0) = sum z^2 >= z(0)^2 = 1; chi(0) >= chi(k) is NOT asserted in general
  for (const auto& k : {KernelSpec::power_law(0.2, 2.5), KernelSpec::periodic_power_law({0.5, 0.25}, 2.0)}) {
    const auto rs = archinfty::compute_resolvent(k, 1.0, 300);
    EXPECT_GE(archinfty::chi_z(rs, 0), 1.0);
  }
}

TEST(ChiZ, TwoPeriodicRatiosApproachClosedFormConstants) {
  // per-parity chi limits of the two-periodic kernel, checked at desk scale
  const auto kernel = archinfty::periodic2_kernel(0.5, 0.25, 2.0);
  const auto rs = archinfty::compute_resolvent(kernel, 1.0, 40000);
  std::vector<double> even, odd;
  for (std::int64_t n = 16000; n <= 20000; ++n) {
    const double ratio = archinfty::chi_z(rs, n) / kernel(n);
    (n % 2 == 0 ? even : odd).push_back(ratio);
  }
  std::nth_element(even.begin(), even.begin() + static_cast<std::ptrdiff_t>(even.size() / 2), even.end());
  std::nth_element(odd.begin(), odd.begin() + static_cast<std::ptrdiff_t>(odd.size() / 2), odd.end());
  EXPECT_NEAR(even[even.size() / 2], 67.9375, 0.03 * 67.9375);
  EXPECT_NEAR(odd[odd.size() / 2], 34.1128, 0.03 * 34.1128);
}

TEST(Autocovariance, SingleLagReport) {
  const auto kernel = KernelSpec::table({0.5});
  const MomentSpec m(1.0, 2.0, 1.0);
  const auto rs = archinfty::compute_resolvent(kernel, 1.0, 80);
  const AutocovReport rep = archinfty::autocovariance(kernel, m, rs, 6);
  const std::vector<double> expected{8.0, 4.0, 2.0, 1.0, 0.5, 0.25, 0.125};
  for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_NEAR(rep.rho[k], expected[k], 1e-10);
  for (std::size_t k = 0; k < rep.rho.size(); ++k)
    EXPECT_DOUBLE_EQ(rep.rho[k], rep.e_nu_sq * rep.chi[k]);  // definitional
}

TEST(Autocovariance, ZeroKernelIsWhiteNoise) {
  const auto kernel = KernelSpec::zero();
  const MomentSpec m(1.0, 2.0, 1.0);
  const auto rs = archinfty::compute_resolvent(kernel, 1.0, 40);
  const AutocovReport rep = archinfty::autocovariance(kernel, m, rs, 5);
  EXPECT_NEAR(rep.rho[0], 1.0, 1e-14);
  for (std::size_t k = 1; k < rep.rho.size(); ++k) EXPECT_DOUBLE_EQ(rep.rho[k], 0.0);
}

TEST(Autocovariance, LagZeroMatchesVariance) {
  const auto kernel = KernelSpec::geometric(0.6, 0.5);
  const MomentSpec m(0.8, 1.0, 1.3);
  const auto rs = archinfty::compute_resolvent(kernel, 0.8, 400);
  const AutocovReport rep = archinfty::autocovariance(kernel, m, rs, 40);
  const auto scalars = archinfty::process_scalars(kernel, m, rs);
  EXPECT_NEAR(rep.rho[0], scalars.var_x, 1e-10 * scalars.var_x);
}

TEST(Autocovariance, RefusesNonStationaryAndDeepLags) {
  const MomentSpec m(1.0, 1.5, 1.0);
  const auto bad = KernelSpec::table({0.9});
  const auto rs_bad = archinfty::compute_resolvent(bad, 1.0, 400);
  EXPECT_THROW(archinfty::autocovariance(bad, m, rs_bad, 10), archinfty::hypothesis_error);

  const auto ok = KernelSpec::table({0.5});
  const auto rs = archinfty::compute_resolvent(ok, 1.0, 100);
  EXPECT_THROW(archinfty::autocovariance(ok, m, rs, 60), std::invalid_argument);
  EXPECT_NO_THROW(archinfty::autocovariance(ok, m, rs, 60, /*allow_deep_lags=*/true));
}

TEST(Autocovariance, PartialSumsSettle) {
  // absolute summability at desk scale: trailing partial-sum increments shrink
  const auto kernel = KernelSpec::power_law(0.1, 3.0);
  const MomentSpec m(1.0, 2.0, 1.0);
  const auto rs = archinfty::compute_resolvent(kernel, 1.0, 3000);
  const AutocovReport rep = archinfty::autocovariance(kernel, m, rs, 1500);
  double total = 0.0;
  for (double r : rep.rho) total += r;
  double tail_increment = 0.0;
  for (std::size_t k = 1000; k < rep.rho.size(); ++k) tail_increment += rep.rho[k];
  EXPECT_LT(tail_increment, 1e-5 * total);
}

TEST(YuleWalker, SingleLagIsExact) {
  const auto kernel = KernelSpec::table({0.5});
  const MomentSpec m(1.0, 2.0, 1.0);
  const auto rs = archinfty::compute_resolvent(kernel, 1.0, 120);
  const auto rep = archinfty::autocovariance(kernel, m, rs, 30);
  EXPECT_LT(archinfty::yule_walker_residual(rep, kernel, m).max_residual, 1e-12);
}

TEST(YuleWalker, ZeroKernel) {
  const auto kernel = KernelSpec::zero();
  const MomentSpec m(1.0, 2.0, 1.0);
  const auto rs = archinfty::compute_resolvent(kernel, 1.0, 40);
  const auto rep = archinfty::autocovariance(kernel, m, rs, 10);
  EXPECT_DOUBLE_EQ(archinfty::yule_walker_residual(rep, kernel, m).max_residual, 0.0);
}

TEST(YuleWalker, PowerLawResidualDominatedByTruncation) {
  const auto kernel = KernelSpec::power_law(0.1, 3.0);
  const MomentSpec m(1.0, 2.0, 1.0);
  const auto rs = archinfty::compute_resolvent(kernel, 1.0, 5000);
  const auto rep = archinfty::autocovariance(kernel, m, rs, 200);
  const auto yw = archinfty::yule_walker_residual(rep, kernel, m);
  EXPECT_LT(yw.max_residual, 1e-4);
  EXPECT_GT(yw.truncation_estimate, 0.0);
}

TEST(VariationOfParameters, SingleLagExact) {
  // b vanishes past lag 1, so the forcing is zero and the two routes agree
  const auto kernel = KernelSpec::table({0.5});
  const MomentSpec m(1.0, 2.0, 1.0);
  const auto rs = archinfty::compute_resolvent(kernel, 1.0, 120);
  const auto rep = archinfty::autocovariance(kernel, m, rs, 30);
  EXPECT_LT(archinfty::variation_of_parameters_discrepancy(rep, kernel, m, rs, 60), 1e-12);
}

TEST(VariationOfParameters, ZeroKernel) {
  const auto kernel = KernelSpec::zero();
  const MomentSpec m(1.0, 2.0, 1.0);
  const auto rs = archinfty::compute_resolvent(kernel, 1.0, 40);
  const auto rep = archinfty::autocovariance(kernel, m, rs, 10);
  EXPECT_DOUBLE_EQ(archinfty::variation_of_parameters_discrepancy(rep, kernel, m, rs, 20), 0.0);
}

TEST(VariationOfParameters, GeometricKernelDualRoute) {
  const auto kernel = KernelSpec::geometric(1.0, 0.5);
  const MomentSpec m(0.5, 0.5, 1.0);
  const auto rs = archinfty::compute_resolvent(kernel, 0.5, 300);
  const auto rep = archinfty::autocovariance(kernel, m, rs, 50);
  EXPECT_LT(archinfty::variation_of_parameters_discrepancy(rep, kernel, m, rs, 300), 1e-8);
}

TEST(VariationOfParameters, ForcingBeyondHorizonRejected) {
  const auto kernel = KernelSpec::table({0.5});
  const MomentSpec m(1.0, 2.0, 1.0);
  const auto rs = archinfty::compute_resolvent(kernel, 1.0, 50);
  const auto rep = archinfty::autocovariance(kernel, m, rs, 10);
  EXPECT_THROW(archinfty::variation_of_parameters_discrepancy(rep, kernel, m, rs, 51), archinfty::horizon_error);
}

}  // namespace
