#include "aclab/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <atomic>

namespace aclab::kernels {

namespace {
std::atomic<int> g_threads{1};

inline bool parallel_enabled(std::int64_t work) {
#ifdef _OPENMP
  return g_threads.load(std::memory_order_relaxed) != 1 && work >= kParallelWorkThreshold;
#else
  (void)work;
  return false;
#endif
}

// ---- per-output-element routines, shared by serial and parallel loops ----

inline double conv_cell(const double* x, const double* k, double bias, const Conv2dDims& d,
                        int oc, int oy, int ox) {
  const int pad = (d.ksize - 1) / 2;
  double acc = bias;
  for (int c = 0; c < d.channels; ++c) {
    const double* xc = x + static_cast<std::size_t>(c) * d.height * d.width;
    const double* kc = k + (static_cast<std::size_t>(oc) * d.channels + c) * d.ksize * d.ksize;
    for (int ky = 0; ky < d.ksize; ++ky) {
      const int iy = oy + ky - pad;
      if (iy < 0 || iy >= d.height) continue;
      const double* xrow = xc + static_cast<std::size_t>(iy) * d.width;
      const double* krow = kc + static_cast<std::size_t>(ky) * d.ksize;
      for (int kx = 0; kx < d.ksize; ++kx) {
        const int ix = ox + kx - pad;
        if (ix < 0 || ix >= d.width) continue;
        acc += xrow[ix] * krow[kx];
      }
    }
  }
  return acc;
}

// dx[c,iy,ix] = sum over (oc,ky,kx) of dout[oc, iy-ky+pad, ix-kx+pad] * k[oc,c,ky,kx]
inline double conv_cell_dx(const double* dout, const double* k, const Conv2dDims& d,
                           int c, int iy, int ix) {
  const int pad = (d.ksize - 1) / 2;
  double acc = 0.0;
  for (int oc = 0; oc < d.out_ch; ++oc) {
    const double* dc = dout + static_cast<std::size_t>(oc) * d.height * d.width;
    const double* kc = k + (static_cast<std::size_t>(oc) * d.channels + c) * d.ksize * d.ksize;
    for (int ky = 0; ky < d.ksize; ++ky) {
      const int oy = iy - ky + pad;
      if (oy < 0 || oy >= d.height) continue;
      const double* drow = dc + static_cast<std::size_t>(oy) * d.width;
      const double* krow = kc + static_cast<std::size_t>(ky) * d.ksize;
      for (int kx = 0; kx < d.ksize; ++kx) {
        const int ox = ix - kx + pad;
        if (ox < 0 || ox >= d.width) continue;
        acc += drow[ox] * krow[kx];
      }
    }
  }
  return acc;
}

// dk[oc,c,ky,kx] = sum over (oy,ox) of dout[oc,oy,ox] * x[c, oy+ky-pad, ox+kx-pad]
inline double conv_cell_dk(const double* dout, const double* x, const Conv2dDims& d,
                           int oc, int c, int ky, int kx) {
  const int pad = (d.ksize - 1) / 2;
  const double* dc = dout + static_cast<std::size_t>(oc) * d.height * d.width;
  const double* xc = x + static_cast<std::size_t>(c) * d.height * d.width;
  double acc = 0.0;
  const int y0 = (pad - ky > 0) ? pad - ky : 0;
  const int y1 = (d.height - 1 + pad - ky < d.height - 1) ? d.height - 1 + pad - ky : d.height - 1;
  const int x0 = (pad - kx > 0) ? pad - kx : 0;
  const int x1 = (d.width - 1 + pad - kx < d.width - 1) ? d.width - 1 + pad - kx : d.width - 1;
  for (int oy = y0; oy <= y1; ++oy) {
    const double* drow = dc + static_cast<std::size_t>(oy) * d.width;
    const double* xrow = xc + static_cast<std::size_t>(oy + ky - pad) * d.width;
    for (int ox = x0; ox <= x1; ++ox) acc += drow[ox] * xrow[ox + kx - pad];
  }
  return acc;
}

inline double conv_cell_db(const double* dout, const Conv2dDims& d, int oc) {
  const double* dc = dout + static_cast<std::size_t>(oc) * d.height * d.width;
  double acc = 0.0;
  const int hw = d.height * d.width;
  for (int i = 0; i < hw; ++i) acc += dc[i];
  return acc;
}

inline double pool_cell(const double* x, const ImageDims& d, int c, int oy, int ox) {
  const double* xc = x + static_cast<std::size_t>(c) * d.height * d.width;
  const int iy = 2 * oy, ix = 2 * ox;
  return 0.25 * (xc[iy * d.width + ix] + xc[iy * d.width + ix + 1] +
                 xc[(iy + 1) * d.width + ix] + xc[(iy + 1) * d.width + ix + 1]);
}

inline double upsample_bwd_cell(const double* dout, const ImageDims& d, int c, int iy, int ix) {
  const int oh = 2 * d.height, ow = 2 * d.width;
  const double* dc = dout + static_cast<std::size_t>(c) * oh * ow;
  const int oy = 2 * iy, ox = 2 * ix;
  return dc[oy * ow + ox] + dc[oy * ow + ox + 1] + dc[(oy + 1) * ow + ox] +
         dc[(oy + 1) * ow + ox + 1];
}

inline double matvec_cell(const double* w, const double* x, double bias, int n, int row) {
  const double* wr = w + static_cast<std::size_t>(row) * n;
  double acc = bias;
  for (int j = 0; j < n; ++j) acc += wr[j] * x[j];
  return acc;
}

inline double matvec_cell_dx(const double* dout, const double* w, int m, int n, int col) {
  double acc = 0.0;
  for (int i = 0; i < m; ++i) acc += dout[i] * w[static_cast<std::size_t>(i) * n + col];
  return acc;
}

inline std::int64_t conv_work(const Conv2dDims& d) {
  return static_cast<std::int64_t>(d.out_ch) * d.channels * d.height * d.width * d.ksize * d.ksize;
}

// ---- 3x3 fast path ----
// Whole-plane workers shared by the serial and parallel drivers; a thread
// always owns complete output planes, so parallel stays bit-identical.

// One output plane: out[oc] = bias + sum_c x[c] * k[oc][c]
void conv3_fwd_plane(const double* x, const double* k, double bias, double* out,
                     const Conv2dDims& d, int oc) {
  const int H = d.height, W = d.width;
  double* op = out + static_cast<std::size_t>(oc) * H * W;
  for (int i = 0; i < H * W; ++i) op[i] = bias;
  for (int c = 0; c < d.channels; ++c) {
    const double* xc = x + static_cast<std::size_t>(c) * H * W;
    const double* kc = k + (static_cast<std::size_t>(oc) * d.channels + c) * 9;
    for (int ky = 0; ky < 3; ++ky) {
      const double k0 = kc[ky * 3], k1 = kc[ky * 3 + 1], k2 = kc[ky * 3 + 2];
      for (int oy = 0; oy < H; ++oy) {
        const int iy = oy + ky - 1;
        if (iy < 0 || iy >= H) continue;
        const double* xr = xc + static_cast<std::size_t>(iy) * W;
        double* orow = op + static_cast<std::size_t>(oy) * W;
        orow[0] += xr[0] * k1 + xr[1] * k2;
        for (int ox = 1; ox < W - 1; ++ox)
          orow[ox] += xr[ox - 1] * k0 + xr[ox] * k1 + xr[ox + 1] * k2;
        orow[W - 1] += xr[W - 2] * k0 + xr[W - 1] * k1;
      }
    }
  }
}

// One kernel-gradient tile: dk[oc][c][*][*] += correlation of dout[oc] with
// shifted x[c]. Nine independent accumulators in one sweep keeps the
// reduction order fixed while giving the FMA units parallel chains.
void conv3_bwd_kernel_pair(const double* dout, const double* x, double* dk, const Conv2dDims& d,
                           int oc, int c) {
  const int H = d.height, W = d.width;
  const double* gp = dout + static_cast<std::size_t>(oc) * H * W;
  const double* xp = x + static_cast<std::size_t>(c) * H * W;
  double a[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
  for (int oy = 0; oy < H; ++oy) {
    const double* g = gp + static_cast<std::size_t>(oy) * W;
    const double* xrow[3] = {oy > 0 ? xp + static_cast<std::size_t>(oy - 1) * W : nullptr,
                             xp + static_cast<std::size_t>(oy) * W,
                             oy + 1 < H ? xp + static_cast<std::size_t>(oy + 1) * W : nullptr};
    for (int ky = 0; ky < 3; ++ky) {
      const double* xr = xrow[ky];
      if (xr == nullptr) continue;
      double s0 = 0.0, s1 = 0.0, s2 = 0.0;
      s1 += g[0] * xr[0];
      s2 += g[0] * xr[1];
      for (int ox = 1; ox < W - 1; ++ox) {
        const double gg = g[ox];
        s0 += gg * xr[ox - 1];
        s1 += gg * xr[ox];
        s2 += gg * xr[ox + 1];
      }
      s0 += g[W - 1] * xr[W - 2];
      s1 += g[W - 1] * xr[W - 1];
      a[ky * 3 + 0] += s0;
      a[ky * 3 + 1] += s1;
      a[ky * 3 + 2] += s2;
    }
  }
  double* dkc = dk + (static_cast<std::size_t>(oc) * d.channels + c) * 9;
  for (int i = 0; i < 9; ++i) dkc[i] += a[i];
}

// One input-gradient plane: dx[c] += sum_oc dout[oc] * rot180(k[oc][c])
void conv3_bwd_input_plane(const double* dout, const double* k, double* dx, const Conv2dDims& d,
                           int c) {
  const int H = d.height, W = d.width;
  double* dp = dx + static_cast<std::size_t>(c) * H * W;
  for (int oc = 0; oc < d.out_ch; ++oc) {
    const double* gc = dout + static_cast<std::size_t>(oc) * H * W;
    const double* kc = k + (static_cast<std::size_t>(oc) * d.channels + c) * 9;
    for (int ky = 0; ky < 3; ++ky) {
      // correlate with the flipped kernel row
      const double k0 = kc[(2 - ky) * 3 + 2], k1 = kc[(2 - ky) * 3 + 1], k2 = kc[(2 - ky) * 3];
      for (int iy = 0; iy < H; ++iy) {
        const int oy = iy + ky - 1;
        if (oy < 0 || oy >= H) continue;
        const double* gr = gc + static_cast<std::size_t>(oy) * W;
        double* dr = dp + static_cast<std::size_t>(iy) * W;
        dr[0] += gr[0] * k1 + gr[1] * k2;
        for (int ix = 1; ix < W - 1; ++ix)
          dr[ix] += gr[ix - 1] * k0 + gr[ix] * k1 + gr[ix + 1] * k2;
        dr[W - 1] += gr[W - 2] * k0 + gr[W - 1] * k1;
      }
    }
  }
}

}  // namespace

void set_threads(int n) {
  if (n < 0) n = 1;
  g_threads.store(n, std::memory_order_relaxed);
#ifdef _OPENMP
  if (n > 1) omp_set_num_threads(n);
#endif
}

int threads() { return g_threads.load(std::memory_order_relaxed); }

// ---------------------------------------------------------------- serial --

namespace serial {

void conv2d_fwd(const double* x, const double* k, const double* b, double* out, const Conv2dDims& d) {
  if (d.ksize == 3 && d.width >= 2) {
    for (int oc = 0; oc < d.out_ch; ++oc) conv3_fwd_plane(x, k, b[oc], out, d, oc);
    return;
  }
  for (int oc = 0; oc < d.out_ch; ++oc)
    for (int oy = 0; oy < d.height; ++oy) {
      double* orow = out + (static_cast<std::size_t>(oc) * d.height + oy) * d.width;
      for (int ox = 0; ox < d.width; ++ox) orow[ox] = conv_cell(x, k, b[oc], d, oc, oy, ox);
    }
}

void conv2d_bwd_input(const double* dout, const double* k, double* dx, const Conv2dDims& d) {
  if (d.ksize == 3 && d.width >= 2) {
    for (int c = 0; c < d.channels; ++c) conv3_bwd_input_plane(dout, k, dx, d, c);
    return;
  }
  for (int c = 0; c < d.channels; ++c)
    for (int iy = 0; iy < d.height; ++iy) {
      double* drow = dx + (static_cast<std::size_t>(c) * d.height + iy) * d.width;
      for (int ix = 0; ix < d.width; ++ix) drow[ix] += conv_cell_dx(dout, k, d, c, iy, ix);
    }
}

void conv2d_bwd_kernel(const double* dout, const double* x, double* dk, const Conv2dDims& d) {
  if (d.ksize == 3 && d.width >= 2) {
    for (int oc = 0; oc < d.out_ch; ++oc)
      for (int c = 0; c < d.channels; ++c) conv3_bwd_kernel_pair(dout, x, dk, d, oc, c);
    return;
  }
  for (int oc = 0; oc < d.out_ch; ++oc)
    for (int c = 0; c < d.channels; ++c) {
      double* dkc = dk + (static_cast<std::size_t>(oc) * d.channels + c) * d.ksize * d.ksize;
      for (int ky = 0; ky < d.ksize; ++ky)
        for (int kx = 0; kx < d.ksize; ++kx)
          dkc[ky * d.ksize + kx] += conv_cell_dk(dout, x, d, oc, c, ky, kx);
    }
}

void conv2d_bwd_bias(const double* dout, double* db, const Conv2dDims& d) {
  for (int oc = 0; oc < d.out_ch; ++oc) db[oc] += conv_cell_db(dout, d, oc);
}

void pool_avg2_fwd(const double* x, double* out, const ImageDims& d) {
  const int oh = d.height / 2, ow = d.width / 2;
  for (int c = 0; c < d.channels; ++c)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox)
        out[(static_cast<std::size_t>(c) * oh + oy) * ow + ox] = pool_cell(x, d, c, oy, ox);
}

void pool_avg2_bwd(const double* dout, double* dx, const ImageDims& d) {
  const int oh = d.height / 2, ow = d.width / 2;
  for (int c = 0; c < d.channels; ++c)
    for (int iy = 0; iy < d.height; ++iy)
      for (int ix = 0; ix < d.width; ++ix)
        dx[(static_cast<std::size_t>(c) * d.height + iy) * d.width + ix] +=
            0.25 * dout[(static_cast<std::size_t>(c) * oh + iy / 2) * ow + ix / 2];
}

void upsample2_fwd(const double* x, double* out, const ImageDims& d) {
  const int oh = 2 * d.height, ow = 2 * d.width;
  for (int c = 0; c < d.channels; ++c)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox)
        out[(static_cast<std::size_t>(c) * oh + oy) * ow + ox] =
            x[(static_cast<std::size_t>(c) * d.height + oy / 2) * d.width + ox / 2];
}

void upsample2_bwd(const double* dout, double* dx, const ImageDims& d) {
  for (int c = 0; c < d.channels; ++c)
    for (int iy = 0; iy < d.height; ++iy)
      for (int ix = 0; ix < d.width; ++ix)
        dx[(static_cast<std::size_t>(c) * d.height + iy) * d.width + ix] +=
            upsample_bwd_cell(dout, d, c, iy, ix);
}

void matvec_fwd(const double* w, const double* x, const double* b, double* out, int m, int n) {
  for (int i = 0; i < m; ++i) out[i] = matvec_cell(w, x, b[i], n, i);
}

void matvec_bwd_input(const double* dout, const double* w, double* dx, int m, int n) {
  for (int j = 0; j < n; ++j) dx[j] += matvec_cell_dx(dout, w, m, n, j);
}

void matvec_bwd_weight(const double* dout, const double* x, double* dw, int m, int n) {
  for (int i = 0; i < m; ++i) {
    double* dwr = dw + static_cast<std::size_t>(i) * n;
    const double g = dout[i];
    for (int j = 0; j < n; ++j) dwr[j] += g * x[j];
  }
}

}  // namespace serial

// -------------------------------------------------------------- parallel --

namespace par {

void conv2d_fwd(const double* x, const double* k, const double* b, double* out, const Conv2dDims& d) {
  if (d.ksize == 3 && d.width >= 2) {
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < d.out_ch; ++oc) conv3_fwd_plane(x, k, b[oc], out, d, oc);
    return;
  }
#pragma omp parallel for collapse(2) schedule(static)
  for (int oc = 0; oc < d.out_ch; ++oc)
    for (int oy = 0; oy < d.height; ++oy) {
      double* orow = out + (static_cast<std::size_t>(oc) * d.height + oy) * d.width;
      for (int ox = 0; ox < d.width; ++ox) orow[ox] = conv_cell(x, k, b[oc], d, oc, oy, ox);
    }
}

void conv2d_bwd_input(const double* dout, const double* k, double* dx, const Conv2dDims& d) {
  if (d.ksize == 3 && d.width >= 2) {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < d.channels; ++c) conv3_bwd_input_plane(dout, k, dx, d, c);
    return;
  }
#pragma omp parallel for collapse(2) schedule(static)
  for (int c = 0; c < d.channels; ++c)
    for (int iy = 0; iy < d.height; ++iy) {
      double* drow = dx + (static_cast<std::size_t>(c) * d.height + iy) * d.width;
      for (int ix = 0; ix < d.width; ++ix) drow[ix] += conv_cell_dx(dout, k, d, c, iy, ix);
    }
}

void conv2d_bwd_kernel(const double* dout, const double* x, double* dk, const Conv2dDims& d) {
  if (d.ksize == 3 && d.width >= 2) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int oc = 0; oc < d.out_ch; ++oc)
      for (int c = 0; c < d.channels; ++c) conv3_bwd_kernel_pair(dout, x, dk, d, oc, c);
    return;
  }
#pragma omp parallel for collapse(2) schedule(static)
  for (int oc = 0; oc < d.out_ch; ++oc)
    for (int c = 0; c < d.channels; ++c) {
      double* dkc = dk + (static_cast<std::size_t>(oc) * d.channels + c) * d.ksize * d.ksize;
      for (int ky = 0; ky < d.ksize; ++ky)
        for (int kx = 0; kx < d.ksize; ++kx)
          dkc[ky * d.ksize + kx] += conv_cell_dk(dout, x, d, oc, c, ky, kx);
    }
}

void conv2d_bwd_bias(const double* dout, double* db, const Conv2dDims& d) {
#pragma omp parallel for schedule(static)
  for (int oc = 0; oc < d.out_ch; ++oc) db[oc] += conv_cell_db(dout, d, oc);
}

void pool_avg2_fwd(const double* x, double* out, const ImageDims& d) {
  const int oh = d.height / 2, ow = d.width / 2;
#pragma omp parallel for schedule(static)
  for (int c = 0; c < d.channels; ++c)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox)
        out[(static_cast<std::size_t>(c) * oh + oy) * ow + ox] = pool_cell(x, d, c, oy, ox);
}

void pool_avg2_bwd(const double* dout, double* dx, const ImageDims& d) {
  const int oh = d.height / 2, ow = d.width / 2;
#pragma omp parallel for schedule(static)
  for (int c = 0; c < d.channels; ++c)
    for (int iy = 0; iy < d.height; ++iy)
      for (int ix = 0; ix < d.width; ++ix)
        dx[(static_cast<std::size_t>(c) * d.height + iy) * d.width + ix] +=
            0.25 * dout[(static_cast<std::size_t>(c) * oh + iy / 2) * ow + ix / 2];
}

void upsample2_fwd(const double* x, double* out, const ImageDims& d) {
  const int oh = 2 * d.height, ow = 2 * d.width;
#pragma omp parallel for schedule(static)
  for (int c = 0; c < d.channels; ++c)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox)
        out[(static_cast<std::size_t>(c) * oh + oy) * ow + ox] =
            x[(static_cast<std::size_t>(c) * d.height + oy / 2) * d.width + ox / 2];
}

void upsample2_bwd(const double* dout, double* dx, const ImageDims& d) {
#pragma omp parallel for schedule(static)
  for (int c = 0; c < d.channels; ++c)
    for (int iy = 0; iy < d.height; ++iy)
      for (int ix = 0; ix < d.width; ++ix)
        dx[(static_cast<std::size_t>(c) * d.height + iy) * d.width + ix] +=
            upsample_bwd_cell(dout, d, c, iy, ix);
}

void matvec_fwd(const double* w, const double* x, const double* b, double* out, int m, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) out[i] = matvec_cell(w, x, b[i], n, i);
}

void matvec_bwd_input(const double* dout, const double* w, double* dx, int m, int n) {
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j) dx[j] += matvec_cell_dx(dout, w, m, n, j);
}

void matvec_bwd_weight(const double* dout, const double* x, double* dw, int m, int n) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    double* dwr = dw + static_cast<std::size_t>(i) * n;
    const double g = dout[i];
    for (int j = 0; j < n; ++j) dwr[j] += g * x[j];
  }
}

}  // namespace par

// -------------------------------------------------------------- dispatch --

void conv2d_fwd(const double* x, const double* k, const double* b, double* out, const Conv2dDims& d) {
  if (parallel_enabled(conv_work(d))) par::conv2d_fwd(x, k, b, out, d);
  else serial::conv2d_fwd(x, k, b, out, d);
}

void conv2d_bwd_input(const double* dout, const double* k, double* dx, const Conv2dDims& d) {
  if (parallel_enabled(conv_work(d))) par::conv2d_bwd_input(dout, k, dx, d);
  else serial::conv2d_bwd_input(dout, k, dx, d);
}

void conv2d_bwd_kernel(const double* dout, const double* x, double* dk, const Conv2dDims& d) {
  if (parallel_enabled(conv_work(d))) par::conv2d_bwd_kernel(dout, x, dk, d);
  else serial::conv2d_bwd_kernel(dout, x, dk, d);
}

void conv2d_bwd_bias(const double* dout, double* db, const Conv2dDims& d) {
  if (parallel_enabled(static_cast<std::int64_t>(d.out_ch) * d.height * d.width))
    par::conv2d_bwd_bias(dout, db, d);
  else
    serial::conv2d_bwd_bias(dout, db, d);
}

namespace {
inline std::int64_t image_work(const ImageDims& d) {
  return static_cast<std::int64_t>(d.channels) * d.height * d.width;
}
}  // namespace

void pool_avg2_fwd(const double* x, double* out, const ImageDims& d) {
  if (parallel_enabled(image_work(d))) par::pool_avg2_fwd(x, out, d);
  else serial::pool_avg2_fwd(x, out, d);
}

void pool_avg2_bwd(const double* dout, double* dx, const ImageDims& d) {
  if (parallel_enabled(image_work(d))) par::pool_avg2_bwd(dout, dx, d);
  else serial::pool_avg2_bwd(dout, dx, d);
}

void upsample2_fwd(const double* x, double* out, const ImageDims& d) {
  if (parallel_enabled(image_work(d) * 4)) par::upsample2_fwd(x, out, d);
  else serial::upsample2_fwd(x, out, d);
}

void upsample2_bwd(const double* dout, double* dx, const ImageDims& d) {
  if (parallel_enabled(image_work(d) * 4)) par::upsample2_bwd(dout, dx, d);
  else serial::upsample2_bwd(dout, dx, d);
}

void matvec_fwd(const double* w, const double* x, const double* b, double* out, int m, int n) {
  if (parallel_enabled(static_cast<std::int64_t>(m) * n)) par::matvec_fwd(w, x, b, out, m, n);
  else serial::matvec_fwd(w, x, b, out, m, n);
}

void matvec_bwd_input(const double* dout, const double* w, double* dx, int m, int n) {
  if (parallel_enabled(static_cast<std::int64_t>(m) * n)) par::matvec_bwd_input(dout, w, dx, m, n);
  else serial::matvec_bwd_input(dout, w, dx, m, n);
}

void matvec_bwd_weight(const double* dout, const double* x, double* dw, int m, int n) {
  if (parallel_enabled(static_cast<std::int64_t>(m) * n)) par::matvec_bwd_weight(dout, x, dw, m, n);
  else serial::matvec_bwd_weight(dout, x, dw, m, n);
}

}  // namespace aclab::kernels
