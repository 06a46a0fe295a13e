//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "gearnetk/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace gearnetk::kernels {

namespace scalar {

void gemm_nn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    if (!accumulate) std::memset(crow, 0, n * sizeof(double));
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_tn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  // c[i,j] (+)= sum_p a[p,i] * b[p,j], a stored k x m
  if (!accumulate) std::memset(c, 0, m * n * sizeof(double));
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  // c[i,j] (+)= dot(a row i, b row j), b stored n x k
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      const double* brow = b + j * k;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] = accumulate ? crow[j] + acc : acc;
    }
  }
}

void axpy(double* y, const double* x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void vadd(double* out, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void vsub(double* out, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void vmul(double* out, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void vscale(double* out, const double* a, double c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = c * a[i];
}

void relu_fwd(double* out, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_bwd_acc(double* dx, const double* x, const double* dy, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] > 0.0) dx[i] += dy[i];
}

double vsum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace scalar

namespace {

bool avx2_supported() {
#if defined(GEARNETK_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect_isa() {
  if (const char* env = std::getenv("GEARNETK_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::kScalar;
  }
  return avx2_supported() ? Isa::kAvx2 : Isa::kScalar;
}

Isa g_isa = detect_isa();

}  // namespace

Isa active_isa() { return g_isa; }

void force_isa(Isa isa) {
#if !defined(GEARNETK_HAVE_AVX2)
  isa = Isa::kScalar;
#else
  if (isa == Isa::kAvx2 && !avx2_supported()) isa = Isa::kScalar;
#endif
  g_isa = isa;
}

#if defined(GEARNETK_HAVE_AVX2)
#define GEARNETK_DISPATCH(fn, ...) \
  return g_isa == Isa::kAvx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)
#else
#define GEARNETK_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

void gemm_nn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  GEARNETK_DISPATCH(gemm_nn, a, b, c, m, k, n, accumulate);
}
void gemm_tn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  GEARNETK_DISPATCH(gemm_tn, a, b, c, m, k, n, accumulate);
}
void gemm_nt(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate) {
  GEARNETK_DISPATCH(gemm_nt, a, b, c, m, k, n, accumulate);
}
void axpy(double* y, const double* x, double a, std::size_t n) {
  GEARNETK_DISPATCH(axpy, y, x, a, n);
}
void vadd(double* out, const double* a, const double* b, std::size_t n) {
  GEARNETK_DISPATCH(vadd, out, a, b, n);
}
void vsub(double* out, const double* a, const double* b, std::size_t n) {
  GEARNETK_DISPATCH(vsub, out, a, b, n);
}
void vmul(double* out, const double* a, const double* b, std::size_t n) {
  GEARNETK_DISPATCH(vmul, out, a, b, n);
}
void vscale(double* out, const double* a, double c, std::size_t n) {
  GEARNETK_DISPATCH(vscale, out, a, c, n);
}
void relu_fwd(double* out, const double* x, std::size_t n) {
  GEARNETK_DISPATCH(relu_fwd, out, x, n);
}
void relu_bwd_acc(double* dx, const double* x, const double* dy, std::size_t n) {
  GEARNETK_DISPATCH(relu_bwd_acc, dx, x, dy, n);
}
double vsum(const double* x, std::size_t n) { GEARNETK_DISPATCH(vsum, x, n); }
double dot(const double* a, const double* b, std::size_t n) {
  GEARNETK_DISPATCH(dot, a, b, n);
}

#undef GEARNETK_DISPATCH

}  // namespace gearnetk::kernels
