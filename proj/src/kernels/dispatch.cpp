#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"
#include "minerva/error.hpp"
#include "minerva/kernels/kernels.hpp"

namespace minerva::kernels {

namespace {

constexpr KernelTable kScalar = {scalar::reduce_max, scalar::reduce_sum, scalar::dot,
                                 scalar::scale,      scalar::axpy,       scalar::blend,
                                 scalar::shift_scale};

#if defined(MINERVA_HAVE_AVX2_KERNELS)
constexpr KernelTable kAvx2 = {avx2::reduce_max, avx2::reduce_sum, avx2::dot,
                               avx2::scale,      avx2::axpy,       avx2::blend,
                               avx2::shift_scale};
#endif

Isa initial_isa() {
  if (const char* env = std::getenv("MINERVA_SIMD")) {
    const std::string_view want(env);
    if (want == "scalar") return Isa::Scalar;
    if (want == "avx2" && cpu_supports(Isa::Avx2)) return Isa::Avx2;
  }
  return cpu_supports(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&table_for(initial_isa())};
  return slot;
}

const KernelTable& active() { return *active_slot().load(std::memory_order_relaxed); }

void check_size(std::size_t a, std::size_t b) {
  if (a != b) throw DomainError("kernel operands differ in length");
}

}  // namespace

const char* to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#if defined(MINERVA_HAVE_AVX2_KERNELS)
  return &kAvx2;
#else
  return nullptr;
#endif
}

bool cpu_supports(Isa isa) {
  if (isa == Isa::Scalar) return true;
#if defined(MINERVA_HAVE_AVX2_KERNELS)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& table_for(Isa isa) {
  if (isa == Isa::Avx2 && avx2_table() != nullptr) return *avx2_table();
  return kScalar;
}

Isa active_isa() { return &active() == &kScalar ? Isa::Scalar : Isa::Avx2; }

bool set_active_isa(Isa isa) {
  if (!cpu_supports(isa)) return false;
  active_slot().store(&table_for(isa), std::memory_order_relaxed);
  return true;
}

double reduce_max(std::span<const double> x) { return active().reduce_max(x.data(), x.size()); }
double reduce_sum(std::span<const double> x) { return active().reduce_sum(x.data(), x.size()); }

double dot(std::span<const double> x, std::span<const double> y) {
  check_size(x.size(), y.size());
  return active().dot(x.data(), y.data(), x.size());
}

void scale(std::span<double> x, double a) { active().scale(x.data(), x.size(), a); }

void axpy(std::span<double> y, std::span<const double> x, double a) {
  check_size(x.size(), y.size());
  active().axpy(y.data(), x.data(), y.size(), a);
}

void blend(std::span<double> t, std::span<const double> x, double a) {
  check_size(t.size(), x.size());
  active().blend(t.data(), x.data(), t.size(), a);
}

void shift_scale(std::span<double> out, std::span<const double> in, double shift, double factor) {
  check_size(out.size(), in.size());
  active().shift_scale(out.data(), in.data(), in.size(), shift, factor);
}

void softmax(std::span<const double> logits, double temperature, std::span<double> out) {
  check_size(logits.size(), out.size());
  if (logits.empty()) return;
  const KernelTable& k = active();
  const double m = k.reduce_max(logits.data(), logits.size());
  k.shift_scale(out.data(), logits.data(), logits.size(), m, 1.0 / temperature);
  for (double& v : out) v = std::exp(v);
  const double total = k.reduce_sum(out.data(), out.size());
  k.scale(out.data(), out.size(), 1.0 / total);
}

}  // namespace minerva::kernels
