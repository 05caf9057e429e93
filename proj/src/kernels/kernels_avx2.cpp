// Copyright 2026 the drape-sim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "drape/kernels/kernels.hpp"

#if defined(DRAPE_KERNELS_AVX2) && defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

#include "drape/kernels/basis.hpp"

namespace drape::kernels {
namespace {

// Vectorized exp for 4 doubles, Cephes-style: range reduction by ln2 split
// into hi/lo parts, rational approximation on the reduced argument, exponent
// reassembly through the IEEE-754 bit layout. Inputs are clamped to
// [-708, 708]; this path only ever sees exponents <= lambda*span in
// magnitude.
inline __m256d exp4(__m256d x) {
  const __m256d hi = _mm256_set1_pd(708.0);
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d one = _mm256_set1_pd(1.0);

  x = _mm256_min_pd(x, hi);
  x = _mm256_max_pd(x, lo);

  __m256d fx = _mm256_fmadd_pd(x, log2e, _mm256_set1_pd(0.5));
  fx = _mm256_floor_pd(fx);
  x = _mm256_fnmadd_pd(fx, ln2_hi, x);
  x = _mm256_fnmadd_pd(fx, ln2_lo, x);

  const __m256d xx = _mm256_mul_pd(x, x);
  __m256d px = _mm256_set1_pd(1.26177193074810590878e-4);
  px = _mm256_fmadd_pd(px, xx, _mm256_set1_pd(3.02994407707441961300e-2));
  px = _mm256_fmadd_pd(px, xx, _mm256_set1_pd(9.99999999999999999910e-1));
  px = _mm256_mul_pd(px, x);
  __m256d qx = _mm256_set1_pd(3.00198505138664455042e-6);
  qx = _mm256_fmadd_pd(qx, xx, _mm256_set1_pd(2.52448340349684104192e-3));
  qx = _mm256_fmadd_pd(qx, xx, _mm256_set1_pd(2.27265548208155028766e-1));
  qx = _mm256_fmadd_pd(qx, xx, _mm256_set1_pd(2.00000000000000000005e0));
  __m256d r = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  r = _mm256_fmadd_pd(_mm256_set1_pd(2.0), r, one);

  const __m128i n32 = _mm256_cvtpd_epi32(fx);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  n64 = _mm256_add_epi64(n64, _mm256_set1_epi64x(1023));
  n64 = _mm256_slli_epi64(n64, 52);
  return _mm256_mul_pd(r, _mm256_castsi256_pd(n64));
}

// cosh(t)-1 and sinh(t)-t for t >= 0, series-protected below t = 0.1 to
// match the scalar reference's cancellation behaviour.
inline void cosh_sinh_shifted4(__m256d t, __m256d* ch, __m256d* sh) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d e = exp4(t);
  const __m256d ei = exp4(_mm256_sub_pd(_mm256_setzero_pd(), t));
  __m256d ch_big = _mm256_fmadd_pd(half, _mm256_add_pd(e, ei),
                                   _mm256_set1_pd(-1.0));
  __m256d sh_big = _mm256_fmsub_pd(half, _mm256_sub_pd(e, ei), t);

  const __m256d t2 = _mm256_mul_pd(t, t);
  __m256d c = _mm256_set1_pd(1.0 / 40320.0);
  c = _mm256_fmadd_pd(c, t2, _mm256_set1_pd(1.0 / 720.0));
  c = _mm256_fmadd_pd(c, t2, _mm256_set1_pd(1.0 / 24.0));
  c = _mm256_fmadd_pd(c, t2, _mm256_set1_pd(0.5));
  const __m256d ch_small = _mm256_mul_pd(t2, c);

  __m256d s = _mm256_set1_pd(1.0 / 362880.0);
  s = _mm256_fmadd_pd(s, t2, _mm256_set1_pd(1.0 / 5040.0));
  s = _mm256_fmadd_pd(s, t2, _mm256_set1_pd(1.0 / 120.0));
  s = _mm256_fmadd_pd(s, t2, _mm256_set1_pd(1.0 / 6.0));
  const __m256d sh_small = _mm256_mul_pd(_mm256_mul_pd(t, t2), s);

  const __m256d small = _mm256_cmp_pd(t, _mm256_set1_pd(0.1), _CMP_LT_OQ);
  *ch = _mm256_blendv_pd(ch_big, ch_small, small);
  *sh = _mm256_blendv_pd(sh_big, sh_small, small);
}

void eval_profile_avx2(const Profile& p, double* y, int n) {
  const double inv = 1.0 / static_cast<double>(n - 1);
  const __m256d vinv = _mm256_set1_pd(inv);
  const __m256d vspan = _mm256_set1_pd(p.span);
  const __m256d vl = _mm256_set1_pd(p.lambda);
  const __m256d vd0 = _mm256_set1_pd(p.d0);
  const __m256d vd1 = _mm256_set1_pd(p.d1);
  const __m256d vqq = _mm256_set1_pd(p.qq);
  const __m256d vc3 = _mm256_set1_pd(p.c3);
  const __m256d vc4 = _mm256_set1_pd(p.c4);

  __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  const __m256d four = _mm256_set1_pd(4.0);

  int i = 0;
  for (; i + 3 < n; i += 4) {
    const __m256d x = _mm256_mul_pd(vspan, _mm256_mul_pd(idx, vinv));
    __m256d acc = _mm256_fmadd_pd(x, _mm256_fmadd_pd(x, vqq, vd1), vd0);
    if (p.basis == Basis::CoshShifted) {
      __m256d ch, sh;
      cosh_sinh_shifted4(_mm256_mul_pd(vl, x), &ch, &sh);
      acc = _mm256_fmadd_pd(vc3, ch, acc);
      acc = _mm256_fmadd_pd(vc4, sh, acc);
    } else {
      const __m256d e1 =
          exp4(_mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(vl, x)));
      const __m256d e2 = exp4(_mm256_sub_pd(
          _mm256_setzero_pd(), _mm256_mul_pd(vl, _mm256_sub_pd(vspan, x))));
      acc = _mm256_fmadd_pd(vc3, e1, acc);
      acc = _mm256_fmadd_pd(vc4, e2, acc);
    }
    _mm256_storeu_pd(y + i, acc);
    idx = _mm256_add_pd(idx, four);
  }
  for (; i < n; ++i) {
    const double x = p.span * (static_cast<double>(i) * inv);
    if (p.basis == Basis::CoshShifted) {
      const double t = p.lambda * x;
      y[i] = p.d0 + x * (p.d1 + x * p.qq) + p.c3 * cosh_m1(t) +
             p.c4 * sinh_mt(t);
    } else {
      y[i] = p.d0 + x * (p.d1 + x * p.qq) + p.c3 * std::exp(-p.lambda * x) +
             p.c4 * std::exp(-p.lambda * (p.span - x));
    }
  }
}

double profile_length_avx2(const double* y, int n, double dx) {
  const __m256d dx2 = _mm256_set1_pd(dx * dx);
  __m256d acc = _mm256_setzero_pd();
  int i = 1;
  for (; i + 3 < n; i += 4) {
    const __m256d a = _mm256_loadu_pd(y + i - 1);
    const __m256d b = _mm256_loadu_pd(y + i);
    const __m256d d = _mm256_sub_pd(b, a);
    acc = _mm256_add_pd(acc, _mm256_sqrt_pd(_mm256_fmadd_pd(d, d, dx2)));
  }
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  double sum = _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair));
  const double dxs = dx * dx;
  for (; i < n; ++i) {
    const double d = y[i] - y[i - 1];
    sum += std::sqrt(dxs + d * d);
  }
  return sum;
}

}  // namespace

const Ops* avx2_ops_impl() {
  static const Ops ops = {"avx2", eval_profile_avx2, profile_length_avx2};
  return &ops;
}

}  // namespace drape::kernels

#else

namespace drape::kernels {
const Ops* avx2_ops_impl() { return nullptr; }
}  // namespace drape::kernels

#endif
