#pragma once

// Raw numeric kernels behind the tape ops. Every kernel exists twice: a
// serial reference in kernels::serial and an OpenMP version in kernels::par.
// Both call the same per-output-element routines, and a thread only ever
// computes whole output elements, so the parallel results are bit-identical
// to the serial ones (fixed reduction order per element, disjoint writes).
// The unqualified functions dispatch between the two.
//
// Backward kernels accumulate (+=) into their gradient outputs; callers zero
// the buffers when accumulation is not wanted.

#include <cstdint>

namespace aclab::kernels {

// Global thread budget. 1 disables the parallel path entirely; 0 means use
// the OpenMP default. Values > 1 are passed to omp_set_num_threads.
void set_threads(int n);
int threads();

// Work (in multiply-adds) below which dispatch stays serial.
inline constexpr std::int64_t kParallelWorkThreshold = 1 << 15;

struct Conv2dDims {
  int channels;   // C
  int height;     // H
  int width;      // W
  int out_ch;     // O
  int ksize;      // K, odd; zero padding of (K-1)/2 keeps H,W fixed
};

struct ImageDims {
  int channels;
  int height;
  int width;
};

namespace serial {
void conv2d_fwd(const double* x, const double* k, const double* b, double* out, const Conv2dDims& d);
void conv2d_bwd_input(const double* dout, const double* k, double* dx, const Conv2dDims& d);
void conv2d_bwd_kernel(const double* dout, const double* x, double* dk, const Conv2dDims& d);
void conv2d_bwd_bias(const double* dout, double* db, const Conv2dDims& d);

void pool_avg2_fwd(const double* x, double* out, const ImageDims& d);        // d = input dims
void pool_avg2_bwd(const double* dout, double* dx, const ImageDims& d);      // d = input dims
void upsample2_fwd(const double* x, double* out, const ImageDims& d);        // d = input dims
void upsample2_bwd(const double* dout, double* dx, const ImageDims& d);      // d = input dims

void matvec_fwd(const double* w, const double* x, const double* b, double* out, int m, int n);
void matvec_bwd_input(const double* dout, const double* w, double* dx, int m, int n);
void matvec_bwd_weight(const double* dout, const double* x, double* dw, int m, int n);
}  // namespace serial

namespace par {
void conv2d_fwd(const double* x, const double* k, const double* b, double* out, const Conv2dDims& d);
void conv2d_bwd_input(const double* dout, const double* k, double* dx, const Conv2dDims& d);
void conv2d_bwd_kernel(const double* dout, const double* x, double* dk, const Conv2dDims& d);
void conv2d_bwd_bias(const double* dout, double* db, const Conv2dDims& d);

void pool_avg2_fwd(const double* x, double* out, const ImageDims& d);
void pool_avg2_bwd(const double* dout, double* dx, const ImageDims& d);
void upsample2_fwd(const double* x, double* out, const ImageDims& d);
void upsample2_bwd(const double* dout, double* dx, const ImageDims& d);

void matvec_fwd(const double* w, const double* x, const double* b, double* out, int m, int n);
void matvec_bwd_input(const double* dout, const double* w, double* dx, int m, int n);
void matvec_bwd_weight(const double* dout, const double* x, double* dw, int m, int n);
}  // namespace par

void conv2d_fwd(const double* x, const double* k, const double* b, double* out, const Conv2dDims& d);
void conv2d_bwd_input(const double* dout, const double* k, double* dx, const Conv2dDims& d);
void conv2d_bwd_kernel(const double* dout, const double* x, double* dk, const Conv2dDims& d);
void conv2d_bwd_bias(const double* dout, double* db, const Conv2dDims& d);

void pool_avg2_fwd(const double* x, double* out, const ImageDims& d);
void pool_avg2_bwd(const double* dout, double* dx, const ImageDims& d);
void upsample2_fwd(const double* x, double* out, const ImageDims& d);
void upsample2_bwd(const double* dout, double* dx, const ImageDims& d);

void matvec_fwd(const double* w, const double* x, const double* b, double* out, int m, int n);
void matvec_bwd_input(const double* dout, const double* w, double* dx, int m, int n);
void matvec_bwd_weight(const double* dout, const double* x, double* dw, int m, int n);

}  // namespace aclab::kernels
