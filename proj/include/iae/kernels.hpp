#pragma once

#include <cstddef>

// Dense kernels behind the autodiff primitives. Every kernel exists in a
// serial variant and an OpenMP variant; both produce bit-identical output
// for a given input because each output element is accumulated in a fixed
// order regardless of the thread partition. The dispatching wrappers pick
// the OpenMP variant unless parallelism was disabled at runtime.
namespace iae::kernels {

void set_parallel(bool enabled);
bool parallel_enabled();

namespace serial {

// C (n x m) = op(A) * op(B), op controlled by transpose flags.
// A is (n x k) or (k x n) when ta; B is (k x m) or (m x k) when tb.
// When accumulate, adds into C instead of overwriting.
void gemm(double* c, const double* a, bool ta, const double* b, bool tb,
          std::size_t n, std::size_t k, std::size_t m, bool accumulate);

void add(double* out, const double* a, const double* b, std::size_t len);
void sub(double* out, const double* a, const double* b, std::size_t len);
void mul(double* out, const double* a, const double* b, std::size_t len);
void div(double* out, const double* a, const double* b, std::size_t len);
void scale(double* out, const double* a, double c, std::size_t len);
void add_const(double* out, const double* a, double c, std::size_t len);
void axpy(double* out, double alpha, const double* x, std::size_t len);

// rows x cols matrix reductions / broadcasts
void row_sum(double* out, const double* a, std::size_t rows, std::size_t cols);
void col_sum(double* out, const double* a, std::size_t rows, std::size_t cols);
void row_broadcast(double* out, const double* v, std::size_t rows, std::size_t cols);
void col_broadcast(double* out, const double* v, std::size_t rows, std::size_t cols);
double total_sum(const double* a, std::size_t len);

void softplus(double* out, const double* a, double beta, std::size_t len);
void sigmoid(double* out, const double* a, double beta, std::size_t len);
void sqrt_shift(double* out, const double* a, double shift, std::size_t len);

} // namespace serial

namespace omp {

void gemm(double* c, const double* a, bool ta, const double* b, bool tb,
          std::size_t n, std::size_t k, std::size_t m, bool accumulate);
void add(double* out, const double* a, const double* b, std::size_t len);
void sub(double* out, const double* a, const double* b, std::size_t len);
void mul(double* out, const double* a, const double* b, std::size_t len);
void div(double* out, const double* a, const double* b, std::size_t len);
void scale(double* out, const double* a, double c, std::size_t len);
void add_const(double* out, const double* a, double c, std::size_t len);
void softplus(double* out, const double* a, double beta, std::size_t len);
void sigmoid(double* out, const double* a, double beta, std::size_t len);
void sqrt_shift(double* out, const double* a, double shift, std::size_t len);
void row_sum(double* out, const double* a, std::size_t rows, std::size_t cols);

} // namespace omp

// Dispatching entry points used by the tape.
void gemm(double* c, const double* a, bool ta, const double* b, bool tb,
          std::size_t n, std::size_t k, std::size_t m, bool accumulate = false);
void add(double* out, const double* a, const double* b, std::size_t len);
void sub(double* out, const double* a, const double* b, std::size_t len);
void mul(double* out, const double* a, const double* b, std::size_t len);
void div(double* out, const double* a, const double* b, std::size_t len);
void scale(double* out, const double* a, double c, std::size_t len);
void add_const(double* out, const double* a, double c, std::size_t len);
void softplus(double* out, const double* a, double beta, std::size_t len);
void sigmoid(double* out, const double* a, double beta, std::size_t len);
void sqrt_shift(double* out, const double* a, double shift, std::size_t len);
void row_sum(double* out, const double* a, std::size_t rows, std::size_t cols);

// Scalar helpers shared by primitive derivative rules.
double softplus_scalar(double x, double beta);
double sigmoid_scalar(double x, double beta);

} // namespace iae::kernels
