#include "iae/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace iae::kernels {

namespace {

std::atomic<bool> g_parallel{true};

// Pack op(X) into a row-major (r x c) scratch buffer when transposed.
// Returns a pointer into `scratch` or the original data when no transpose
// is needed.
const double* pack(const double* x, bool trans, std::size_t r, std::size_t c,
                   std::vector<double>& scratch) {
  if (!trans) return x;
  scratch.resize(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      scratch[i * c + j] = x[j * r + i];
  return scratch.data();
}

// Inner loop shared by the serial and OpenMP gemm: row i of C accumulated
// in fixed k order, so the result does not depend on the thread partition.
inline void gemm_row(double* crow, const double* arow, const double* b,
                     std::size_t k, std::size_t m, bool accumulate) {
  if (!accumulate) std::memset(crow, 0, m * sizeof(double));
  for (std::size_t l = 0; l < k; ++l) {
    const double a = arow[l];
    const double* brow = b + l * m;
    for (std::size_t j = 0; j < m; ++j) crow[j] += a * brow[j];
  }
}

} // namespace

void set_parallel(bool enabled) { g_parallel.store(enabled); }
bool parallel_enabled() { return g_parallel.load(); }

namespace serial {

void gemm(double* c, const double* a, bool ta, const double* b, bool tb,
          std::size_t n, std::size_t k, std::size_t m, bool accumulate) {
  std::vector<double> sa, sb;
  const double* ap = pack(a, ta, n, k, sa);
  const double* bp = pack(b, tb, k, m, sb);
  for (std::size_t i = 0; i < n; ++i)
    gemm_row(c + i * m, ap + i * k, bp, k, m, accumulate);
}

void add(double* out, const double* a, const double* b, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] = a[i] + b[i];
}
void sub(double* out, const double* a, const double* b, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] = a[i] - b[i];
}
void mul(double* out, const double* a, const double* b, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] = a[i] * b[i];
}
void div(double* out, const double* a, const double* b, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] = a[i] / b[i];
}
void scale(double* out, const double* a, double c, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] = a[i] * c;
}
void add_const(double* out, const double* a, double c, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] = a[i] + c;
}
void axpy(double* out, double alpha, const double* x, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] += alpha * x[i];
}

void row_sum(double* out, const double* a, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    const double* r = a + i * cols;
    for (std::size_t j = 0; j < cols; ++j) s += r[j];
    out[i] = s;
  }
}
void col_sum(double* out, const double* a, std::size_t rows, std::size_t cols) {
  std::memset(out, 0, cols * sizeof(double));
  for (std::size_t i = 0; i < rows; ++i) {
    const double* r = a + i * cols;
    for (std::size_t j = 0; j < cols; ++j) out[j] += r[j];
  }
}
void row_broadcast(double* out, const double* v, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i)
    std::memcpy(out + i * cols, v, cols * sizeof(double));
}
void col_broadcast(double* out, const double* v, std::size_t rows, std::size_t cols) {
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] = v[i];
}
double total_sum(const double* a, std::size_t len) {
  double s = 0.0;
  for (std::size_t i = 0; i < len; ++i) s += a[i];
  return s;
}

void softplus(double* out, const double* a, double beta, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] = softplus_scalar(a[i], beta);
}
void sigmoid(double* out, const double* a, double beta, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] = sigmoid_scalar(a[i], beta);
}
void sqrt_shift(double* out, const double* a, double shift, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] = std::sqrt(a[i] + shift);
}

} // namespace serial

namespace omp {

void gemm(double* c, const double* a, bool ta, const double* b, bool tb,
          std::size_t n, std::size_t k, std::size_t m, bool accumulate) {
  std::vector<double> sa, sb;
  const double* ap = pack(a, ta, n, k, sa);
  const double* bp = pack(b, tb, k, m, sb);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)n; ++i)
    gemm_row(c + i * m, ap + i * k, bp, k, m, accumulate);
}

#define IAE_OMP_MAP(name, expr)                                              \
  void name(double* out, const double* a, const double* b, std::size_t len) { \
    _Pragma("omp parallel for schedule(static)")                             \
    for (long long i = 0; i < (long long)len; ++i) out[i] = (expr);          \
  }
IAE_OMP_MAP(add, a[i] + b[i])
IAE_OMP_MAP(sub, a[i] - b[i])
IAE_OMP_MAP(mul, a[i] * b[i])
IAE_OMP_MAP(div, a[i] / b[i])
#undef IAE_OMP_MAP

void scale(double* out, const double* a, double c, std::size_t len) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)len; ++i) out[i] = a[i] * c;
}
void add_const(double* out, const double* a, double c, std::size_t len) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)len; ++i) out[i] = a[i] + c;
}
void softplus(double* out, const double* a, double beta, std::size_t len) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)len; ++i) out[i] = softplus_scalar(a[i], beta);
}
void sigmoid(double* out, const double* a, double beta, std::size_t len) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)len; ++i) out[i] = sigmoid_scalar(a[i], beta);
}
void sqrt_shift(double* out, const double* a, double shift, std::size_t len) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)len; ++i) out[i] = std::sqrt(a[i] + shift);
}
void row_sum(double* out, const double* a, std::size_t rows, std::size_t cols) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < (long long)rows; ++i) {
    double s = 0.0;
    const double* r = a + i * cols;
    for (std::size_t j = 0; j < cols; ++j) s += r[j];
    out[i] = s;
  }
}

} // namespace omp

void gemm(double* c, const double* a, bool ta, const double* b, bool tb,
          std::size_t n, std::size_t k, std::size_t m, bool accumulate) {
  if (parallel_enabled())
    omp::gemm(c, a, ta, b, tb, n, k, m, accumulate);
  else
    serial::gemm(c, a, ta, b, tb, n, k, m, accumulate);
}

#define IAE_DISPATCH2(name)                                                   \
  void name(double* out, const double* a, const double* b, std::size_t len) { \
    if (parallel_enabled()) omp::name(out, a, b, len);                        \
    else serial::name(out, a, b, len);                                        \
  }
IAE_DISPATCH2(add)
IAE_DISPATCH2(sub)
IAE_DISPATCH2(mul)
IAE_DISPATCH2(div)
#undef IAE_DISPATCH2

#define IAE_DISPATCH_C(name)                                                 \
  void name(double* out, const double* a, double c, std::size_t len) {       \
    if (parallel_enabled()) omp::name(out, a, c, len);                       \
    else serial::name(out, a, c, len);                                       \
  }
IAE_DISPATCH_C(scale)
IAE_DISPATCH_C(add_const)
IAE_DISPATCH_C(softplus)
IAE_DISPATCH_C(sigmoid)
IAE_DISPATCH_C(sqrt_shift)
#undef IAE_DISPATCH_C

void row_sum(double* out, const double* a, std::size_t rows, std::size_t cols) {
  if (parallel_enabled()) omp::row_sum(out, a, rows, cols);
  else serial::row_sum(out, a, rows, cols);
}

double softplus_scalar(double x, double beta) {
  const double bx = beta * x;
  if (bx > 30.0) return x;
  if (bx < -30.0) return std::exp(bx) / beta;
  return std::log1p(std::exp(bx)) / beta;
}

double sigmoid_scalar(double x, double beta) {
  const double bx = beta * x;
  if (bx >= 0.0) return 1.0 / (1.0 + std::exp(-bx));
  const double e = std::exp(bx);
  return e / (1.0 + e);
}

} // namespace iae::kernels
