//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstddef>

// Dense double-precision inner loops behind the tensor core.
//
// Every kernel exists as a scalar reference implementation and, on x86-64
// builds with GEARNETK_ENABLE_AVX2, an AVX2+FMA variant. The unqualified
// entry points dispatch once at startup based on CPUID; setting the
// environment variable GEARNETK_SIMD=scalar forces the reference path.
// Scalar and SIMD variants are equivalence-tested against each other
// (exact for elementwise kernels, small relative tolerance for reductions
// and matrix products, where FMA and lane order change the rounding).
namespace gearnetk::kernels {

enum class Isa { kScalar, kAvx2 };

// The instruction set the dispatched entry points are using.
Isa active_isa();

// Test hook: override the dispatched implementation. Not thread-safe against
// concurrent kernel calls; intended for equivalence tests only.
void force_isa(Isa isa);

// C[m x n] (+)= A[m x k] * B[k x n]          (row-major)
void gemm_nn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);
// C[m x n] (+)= A^T * B with A stored [k x m]
void gemm_tn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);
// C[m x n] (+)= A * B^T with B stored [n x k]
void gemm_nt(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);

void axpy(double* y, const double* x, double a, std::size_t n);  // y += a*x
void vadd(double* out, const double* a, const double* b, std::size_t n);
void vsub(double* out, const double* a, const double* b, std::size_t n);
void vmul(double* out, const double* a, const double* b, std::size_t n);
void vscale(double* out, const double* a, double c, std::size_t n);
void relu_fwd(double* out, const double* x, std::size_t n);
// dx += dy where x > 0
void relu_bwd_acc(double* dx, const double* x, const double* dy, std::size_t n);
double vsum(const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);

namespace scalar {
void gemm_nn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void gemm_tn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void gemm_nt(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void axpy(double* y, const double* x, double a, std::size_t n);
void vadd(double* out, const double* a, const double* b, std::size_t n);
void vsub(double* out, const double* a, const double* b, std::size_t n);
void vmul(double* out, const double* a, const double* b, std::size_t n);
void vscale(double* out, const double* a, double c, std::size_t n);
void relu_fwd(double* out, const double* x, std::size_t n);
void relu_bwd_acc(double* dx, const double* x, const double* dy, std::size_t n);
double vsum(const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(GEARNETK_HAVE_AVX2)
namespace avx2 {
void gemm_nn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void gemm_tn(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void gemm_nt(const double* a, const double* b, double* c,
             std::size_t m, std::size_t k, std::size_t n, bool accumulate);
void axpy(double* y, const double* x, double a, std::size_t n);
void vadd(double* out, const double* a, const double* b, std::size_t n);
void vsub(double* out, const double* a, const double* b, std::size_t n);
void vmul(double* out, const double* a, const double* b, std::size_t n);
void vscale(double* out, const double* a, double c, std::size_t n);
void relu_fwd(double* out, const double* x, std::size_t n);
void relu_bwd_acc(double* dx, const double* x, const double* dy, std::size_t n);
double vsum(const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace avx2
#endif

}  // namespace gearnetk::kernels
