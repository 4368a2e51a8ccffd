#include "minerva/kernels/kernels.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <vector>

#include "minerva/rng.hpp"

namespace minerva {
namespace {

using kernels::Isa;

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = (rng.uniform() - 0.5) * std::ldexp(1.0, static_cast<int>(rng.index(40)) - 20);
  return v;
}

void expect_bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a[i]), std::bit_cast<std::uint64_t>(b[i])) << "index " << i;
  }
}

void expect_bits_equal(double a, double b) {
  EXPECT_EQ(std::bit_cast<std::uint64_t>(a), std::bit_cast<std::uint64_t>(b)) << a << " vs " << b;
}

TEST(Kernels, ScalarReference) {
  const auto& k = kernels::scalar_table();
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{2, 2, 2, 2, 2};
  EXPECT_EQ(k.reduce_sum(x.data(), x.size()), 15.0);
  EXPECT_EQ(k.reduce_max(x.data(), x.size()), 5.0);
  EXPECT_EQ(k.dot(x.data(), y.data(), x.size()), 30.0);
  EXPECT_EQ(k.reduce_max(x.data(), 0), -INFINITY);
  EXPECT_EQ(k.reduce_sum(x.data(), 0), 0.0);
  std::vector<double> t{1, 1, 1, 1, 1};
  k.blend(t.data(), x.data(), t.size(), 0.75);
  EXPECT_DOUBLE_EQ(t[4], 0.75 + 0.25 * 5);
  k.axpy(t.data(), y.data(), t.size(), -1.0);
  EXPECT_DOUBLE_EQ(t[4], 0.75 + 0.25 * 5 - 2);
  std::vector<double> out(5);
  k.shift_scale(out.data(), x.data(), 5, 1.0, 0.5);
  EXPECT_EQ(out[2], 1.0);
}

TEST(Kernels, Avx2BitIdenticalToScalar) {
  if (!kernels::cpu_supports(Isa::Avx2)) GTEST_SKIP() << "no AVX2 on this CPU";
  const auto& s = kernels::scalar_table();
  const auto& v = *kernels::avx2_table();
  Rng rng(11);
  for (std::size_t n = 0; n < 70; ++n) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto x = random_vector(rng, n);
      const auto y = random_vector(rng, n);
      const double a = rng.uniform() * 2 - 1;
      expect_bits_equal(s.reduce_sum(x.data(), n), v.reduce_sum(x.data(), n));
      expect_bits_equal(s.reduce_max(x.data(), n), v.reduce_max(x.data(), n));
      expect_bits_equal(s.dot(x.data(), y.data(), n), v.dot(x.data(), y.data(), n));

      auto xs = x, xv = x;
      s.scale(xs.data(), n, a);
      v.scale(xv.data(), n, a);
      expect_bits_equal(xs, xv);

      auto ys = y, yv = y;
      s.axpy(ys.data(), x.data(), n, a);
      v.axpy(yv.data(), x.data(), n, a);
      expect_bits_equal(ys, yv);

      auto ts = y, tv = y;
      s.blend(ts.data(), x.data(), n, a);
      v.blend(tv.data(), x.data(), n, a);
      expect_bits_equal(ts, tv);

      std::vector<double> os(n), ov(n);
      s.shift_scale(os.data(), x.data(), n, a, 1.0 / 0.7);
      v.shift_scale(ov.data(), x.data(), n, a, 1.0 / 0.7);
      expect_bits_equal(os, ov);
    }
  }
}

TEST(Kernels, DispatchSwitchesAndSoftmaxAgrees) {
  const Isa original = kernels::active_isa();
  Rng rng(3);
  const auto logits = random_vector(rng, 37);
  std::vector<double> p_scalar(37), p_active(37);
  ASSERT_TRUE(kernels::set_active_isa(Isa::Scalar));
  EXPECT_EQ(kernels::active_isa(), Isa::Scalar);
  kernels::softmax(logits, 0.8, p_scalar);
  if (kernels::set_active_isa(Isa::Avx2)) {
    EXPECT_EQ(kernels::active_isa(), Isa::Avx2);
    kernels::softmax(logits, 0.8, p_active);
    expect_bits_equal(p_scalar, p_active);
  }
  kernels::set_active_isa(original);
  double total = 0;
  for (double p : p_scalar) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Kernels, SoftmaxIsStableForLargeLogits) {
  std::vector<double> logits{1000.0, 1000.0, -1000.0};
  std::vector<double> p(3);
  kernels::softmax(logits, 1.0, p);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  EXPECT_EQ(p[2], 0.0);
}

TEST(Kernels, LengthMismatchThrows) {
  std::vector<double> a(3), b(4);
  EXPECT_ANY_THROW(kernels::dot(a, b));
  EXPECT_ANY_THROW(kernels::axpy(a, b, 1.0));
}

}  // namespace
}  // namespace minerva
