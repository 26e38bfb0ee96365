#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Tape-based reverse-mode automatic differentiation with taped forward-mode
// tangent propagation (jvp) and taped cotangent propagation (vjp). Tangent
// and cotangent sweeps emit ordinary catalogue primitives onto the same
// tape, so any scalar built from a jvp/vjp output can itself be pushed
// through backward() — second-order (reverse-over-forward) differentiation
// needs no extra machinery.
namespace iae::ad {

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

struct Shape {
  int rows = 0;
  int cols = 0;
  std::size_t size() const { return std::size_t(rows) * cols; }
  bool operator==(const Shape&) const = default;
  bool scalar() const { return rows == 1 && cols == 1; }
};

enum class Op : std::uint8_t {
  Leaf,     // parameter or input; no operands
  MatMul,   // op(a) * op(b), transpose flags in ta/tb
  Add, Sub, Mul, Div,   // elementwise, same shape
  Scale,    // a * c
  AddConst, // a + c
  AddBias,  // (n x m) + row-broadcast (1 x m)
  RowSum,   // (n x m) -> (n x 1)
  ColSum,   // (n x m) -> (1 x m)
  Sum,      // (n x m) -> (1 x 1)
  RowBroadcast,    // (1 x m) -> (n x m), n in aux
  ColBroadcast,    // (n x 1) -> (n x m), m in aux
  ScalarBroadcast, // (1 x 1) -> (n x m), n,m in shape
  SqrtShift, // sqrt(a + c) elementwise
  Softplus,  // (1/c) * log(1 + exp(c*a)), overflow-guarded
  Sigmoid,   // 1 / (1 + exp(-c*a))
};

struct Node {
  Op op = Op::Leaf;
  Shape shape;
  int a = -1;   // operand node ids
  int b = -1;
  bool ta = false, tb = false;  // MatMul transpose flags
  double c = 0.0;               // scalar attribute (Scale/AddConst/beta/shift)
  std::vector<double> val;
};

class Tape;

// Lightweight handle to a recorded node.
struct Value {
  Tape* tape = nullptr;
  int id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
  Shape shape() const;
  const std::vector<double>& data() const;
  double scalar() const;
};

class Tape {
 public:
  // Norm epsilon guard used throughout the losses (inside the sqrt).
  static constexpr double kNormEps = 1e-12;

  Value leaf(Shape s, std::span<const double> data);
  Value leaf(Shape s, std::vector<double> data);
  Value scalar_leaf(double v) { return leaf({1, 1}, {&v, 1}); }

  Value matmul(Value a, Value b, bool ta = false, bool tb = false);
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value mul(Value a, Value b);
  Value div(Value a, Value b);
  Value scale(Value a, double c);
  Value add_const(Value a, double c);
  Value add_bias(Value m, Value bias);
  Value row_sum(Value a);
  Value col_sum(Value a);
  Value sum(Value a);
  Value row_broadcast(Value v, int rows);
  Value col_broadcast(Value v, int cols);
  Value scalar_broadcast(Value v, Shape s);
  Value sqrt_shift(Value a, double shift = kNormEps);
  Value softplus(Value a, double beta);
  Value sigmoid(Value a, double beta);

  // Composites built from catalogue primitives.
  Value mean(Value a);
  Value sum_sq(Value a);
  Value norm(Value a);        // sqrt(sum of squares + eps)
  Value row_norms(Value a);   // per-row L2 norm, (n x m) -> (n x 1)

  const Node& node(int id) const { return nodes_[id]; }
  int size() const { return int(nodes_.size()); }

  // Recomputes every non-leaf node value in order; recorded values must be
  // reproduced bit-for-bit.
  void replay();

  // Drops all nodes at or after `mark` (checkpoint/rollback for reusing a
  // tape across training steps).
  void truncate(int mark);

  // Reverse-mode gradient of a recorded scalar with respect to the given
  // leaves. Untouched leaves get zero gradients.
  std::vector<std::vector<double>> backward(Value output,
                                            std::span<const Value> leaves);

  // Gradient buffers for every node; mainly for tests.
  std::vector<double> gradient_of(Value output, Value leaf);

 private:
  friend struct Value;
  Value push(Node n);
  void eval(Node& n) const;
  std::vector<Node> nodes_;
};

// A function expressed in catalogue primitives, mapping one Value to one
// Value on the given tape.
using TapedFn = std::function<Value(Tape&, Value)>;

// Forward-mode: df(z) applied to tangent u, batched over rows of z/u.
// The result is recorded on the tape and differentiable again.
Value jvp(Tape& tape, const TapedFn& fn, Value z, Value u);

// Reverse-mode: u^T dg(x), batched over rows; row j of the result is
// u_j^T dg(x_j). Recorded on the tape and differentiable again.
Value vjp(Tape& tape, const TapedFn& fn, Value x, Value u);

// Dense Jacobian assembled column-by-column via jvp with basis tangents,
// recorded on the given tape (fn's parameter leaves usually live there).
// Oracle-grade; input dimension must be small (<= 64).
// Returns row-major (out_dim x in_dim).
std::vector<double> explicit_jacobian(Tape& tape, const TapedFn& fn,
                                      std::span<const double> point, int in_dim,
                                      int* out_dim = nullptr);

} // namespace iae::ad
