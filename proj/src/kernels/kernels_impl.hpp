#pragma once

#include <cstddef>

namespace minerva::kernels {

namespace scalar {
double reduce_max(const double* x, std::size_t n);
double reduce_sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void scale(double* x, std::size_t n, double a);
void axpy(double* y, const double* x, std::size_t n, double a);
void blend(double* t, const double* x, std::size_t n, double a);
void shift_scale(double* out, const double* in, std::size_t n, double shift, double factor);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define MINERVA_HAVE_AVX2_KERNELS 1
namespace avx2 {
double reduce_max(const double* x, std::size_t n);
double reduce_sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
void scale(double* x, std::size_t n, double a);
void axpy(double* y, const double* x, std::size_t n, double a);
void blend(double* t, const double* x, std::size_t n, double a);
void shift_scale(double* out, const double* in, std::size_t n, double shift, double factor);
}  // namespace avx2
#endif

}  // namespace minerva::kernels
