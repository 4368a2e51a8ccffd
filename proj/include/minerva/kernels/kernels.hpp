#pragma once

// Dense double-precision kernels used by the policy simulator and the linear
// quality scorer. Each kernel has a scalar reference and an AVX2 variant; the
// variant is picked once at startup from CPUID and can be forced with
// MINERVA_SIMD=scalar|avx2.
//
// Reductions use four interleaved partial sums combined as
// ((s0 + s1) + (s2 + s3)) followed by the tail in order, in both variants, so
// every kernel is bit-identical across instruction sets.

#include <cstddef>
#include <span>

namespace minerva::kernels {

enum class Isa { Scalar, Avx2 };

const char* to_string(Isa isa);

struct KernelTable {
  double (*reduce_max)(const double* x, std::size_t n);
  double (*reduce_sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  void (*scale)(double* x, std::size_t n, double a);
  void (*axpy)(double* y, const double* x, std::size_t n, double a);
  void (*blend)(double* t, const double* x, std::size_t n, double a);
  void (*shift_scale)(double* out, const double* in, std::size_t n, double shift, double factor);
};

const KernelTable& scalar_table();
/// nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_table();

bool cpu_supports(Isa isa);
Isa active_isa();
/// Returns false (and leaves the selection unchanged) if unsupported.
bool set_active_isa(Isa isa);
const KernelTable& table_for(Isa isa);

double reduce_max(std::span<const double> x);
double reduce_sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
/// x *= a
void scale(std::span<double> x, double a);
/// y += a * x
void axpy(std::span<double> y, std::span<const double> x, double a);
/// t = a * t + (1 - a) * x
void blend(std::span<double> t, std::span<const double> x, double a);
/// out = (in - shift) * factor
void shift_scale(std::span<double> out, std::span<const double> in, double shift, double factor);

/// out = softmax(logits / temperature). temperature > 0.
void softmax(std::span<const double> logits, double temperature, std::span<double> out);

}  // namespace minerva::kernels
