#include "iae/tape.hpp"

#include "iae/kernels.hpp"

#include <cmath>
#include <cstring>

namespace iae::ad {

namespace k = iae::kernels;

Shape Value::shape() const { return tape->node(id).shape; }
const std::vector<double>& Value::data() const { return tape->node(id).val; }
double Value::scalar() const {
  const Node& n = tape->node(id);
  if (!n.shape.scalar()) throw ContractError("Value::scalar on non-scalar node");
  return n.val[0];
}

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw ShapeError(msg);
}

} // namespace

Value Tape::push(Node n) {
  if (n.op != Op::Leaf) {
    n.val.assign(n.shape.size(), 0.0);
    eval(n);
  }
  nodes_.push_back(std::move(n));
  return Value{this, int(nodes_.size()) - 1};
}

void Tape::eval(Node& n) const {
  const double* a = n.a >= 0 ? nodes_[n.a].val.data() : nullptr;
  const double* b = n.b >= 0 ? nodes_[n.b].val.data() : nullptr;
  const std::size_t len = n.shape.size();
  switch (n.op) {
    case Op::Leaf:
      break;
    case Op::MatMul: {
      const Shape& sa = nodes_[n.a].shape;
      const std::size_t rows = n.shape.rows, cols = n.shape.cols;
      const std::size_t inner = n.ta ? sa.rows : sa.cols;
      k::gemm(n.val.data(), a, n.ta, b, n.tb, rows, inner, cols);
      break;
    }
    case Op::Add: k::add(n.val.data(), a, b, len); break;
    case Op::Sub: k::sub(n.val.data(), a, b, len); break;
    case Op::Mul: k::mul(n.val.data(), a, b, len); break;
    case Op::Div: k::div(n.val.data(), a, b, len); break;
    case Op::Scale: k::scale(n.val.data(), a, n.c, len); break;
    case Op::AddConst: k::add_const(n.val.data(), a, n.c, len); break;
    case Op::AddBias: {
      for (int i = 0; i < n.shape.rows; ++i)
        k::serial::add(n.val.data() + std::size_t(i) * n.shape.cols,
                       a + std::size_t(i) * n.shape.cols, b, n.shape.cols);
      break;
    }
    case Op::RowSum:
      k::row_sum(n.val.data(), a, nodes_[n.a].shape.rows, nodes_[n.a].shape.cols);
      break;
    case Op::ColSum:
      k::serial::col_sum(n.val.data(), a, nodes_[n.a].shape.rows, nodes_[n.a].shape.cols);
      break;
    case Op::Sum:
      n.val[0] = k::serial::total_sum(a, nodes_[n.a].shape.size());
      break;
    case Op::RowBroadcast:
      k::serial::row_broadcast(n.val.data(), a, n.shape.rows, n.shape.cols);
      break;
    case Op::ColBroadcast:
      k::serial::col_broadcast(n.val.data(), a, n.shape.rows, n.shape.cols);
      break;
    case Op::ScalarBroadcast:
      for (std::size_t i = 0; i < len; ++i) n.val[i] = a[0];
      break;
    case Op::SqrtShift: k::sqrt_shift(n.val.data(), a, n.c, len); break;
    case Op::Softplus: k::softplus(n.val.data(), a, n.c, len); break;
    case Op::Sigmoid: k::sigmoid(n.val.data(), a, n.c, len); break;
  }
}

Value Tape::leaf(Shape s, std::span<const double> data) {
  require(s.rows >= 1 && s.cols >= 1, "leaf: degenerate shape");
  require(data.size() == s.size(), "leaf: data length != shape size");
  Node n;
  n.op = Op::Leaf;
  n.shape = s;
  n.val.assign(data.begin(), data.end());
  nodes_.push_back(std::move(n));
  return Value{this, int(nodes_.size()) - 1};
}

Value Tape::leaf(Shape s, std::vector<double> data) {
  require(s.rows >= 1 && s.cols >= 1, "leaf: degenerate shape");
  require(data.size() == s.size(), "leaf: data length != shape size");
  Node n;
  n.op = Op::Leaf;
  n.shape = s;
  n.val = std::move(data);
  nodes_.push_back(std::move(n));
  return Value{this, int(nodes_.size()) - 1};
}

Value Tape::matmul(Value a, Value b, bool ta, bool tb) {
  const Shape sa = a.shape(), sb = b.shape();
  const int ar = ta ? sa.cols : sa.rows, ac = ta ? sa.rows : sa.cols;
  const int br = tb ? sb.cols : sb.rows, bc = tb ? sb.rows : sb.cols;
  require(ac == br, "matmul: inner dimensions differ");
  Node n;
  n.op = Op::MatMul;
  n.shape = {ar, bc};
  n.a = a.id; n.b = b.id; n.ta = ta; n.tb = tb;
  return push(std::move(n));
}

namespace {
Node binary(Op op, Value a, Value b) {
  require(a.shape() == b.shape(), "elementwise op: shape mismatch");
  Node n;
  n.op = op;
  n.shape = a.shape();
  n.a = a.id; n.b = b.id;
  return n;
}
Node unary(Op op, Value a, double c = 0.0) {
  Node n;
  n.op = op;
  n.shape = a.shape();
  n.a = a.id; n.c = c;
  return n;
}
} // namespace

Value Tape::add(Value a, Value b) { return push(binary(Op::Add, a, b)); }
Value Tape::sub(Value a, Value b) { return push(binary(Op::Sub, a, b)); }
Value Tape::mul(Value a, Value b) { return push(binary(Op::Mul, a, b)); }
Value Tape::div(Value a, Value b) { return push(binary(Op::Div, a, b)); }
Value Tape::scale(Value a, double c) { return push(unary(Op::Scale, a, c)); }
Value Tape::add_const(Value a, double c) { return push(unary(Op::AddConst, a, c)); }

Value Tape::add_bias(Value m, Value bias) {
  require(bias.shape().rows == 1 && bias.shape().cols == m.shape().cols,
          "add_bias: bias must be (1 x cols)");
  Node n;
  n.op = Op::AddBias;
  n.shape = m.shape();
  n.a = m.id; n.b = bias.id;
  return push(std::move(n));
}

Value Tape::row_sum(Value a) {
  Node n = unary(Op::RowSum, a);
  n.shape = {a.shape().rows, 1};
  return push(std::move(n));
}
Value Tape::col_sum(Value a) {
  Node n = unary(Op::ColSum, a);
  n.shape = {1, a.shape().cols};
  return push(std::move(n));
}
Value Tape::sum(Value a) {
  Node n = unary(Op::Sum, a);
  n.shape = {1, 1};
  return push(std::move(n));
}
Value Tape::row_broadcast(Value v, int rows) {
  require(v.shape().rows == 1, "row_broadcast: input must be a row vector");
  Node n = unary(Op::RowBroadcast, v);
  n.shape = {rows, v.shape().cols};
  return push(std::move(n));
}
Value Tape::col_broadcast(Value v, int cols) {
  require(v.shape().cols == 1, "col_broadcast: input must be a column vector");
  Node n = unary(Op::ColBroadcast, v);
  n.shape = {v.shape().rows, cols};
  return push(std::move(n));
}
Value Tape::scalar_broadcast(Value v, Shape s) {
  require(v.shape().scalar(), "scalar_broadcast: input must be scalar");
  Node n = unary(Op::ScalarBroadcast, v);
  n.shape = s;
  return push(std::move(n));
}
Value Tape::sqrt_shift(Value a, double shift) {
  return push(unary(Op::SqrtShift, a, shift));
}
Value Tape::softplus(Value a, double beta) {
  return push(unary(Op::Softplus, a, beta));
}
Value Tape::sigmoid(Value a, double beta) {
  return push(unary(Op::Sigmoid, a, beta));
}

Value Tape::mean(Value a) {
  return scale(sum(a), 1.0 / double(a.shape().size()));
}
Value Tape::sum_sq(Value a) { return sum(mul(a, a)); }
Value Tape::norm(Value a) {
  require(a.shape().size() >= 1, "norm: empty vector");
  return sqrt_shift(sum_sq(a), kNormEps);
}
Value Tape::row_norms(Value a) {
  return sqrt_shift(row_sum(mul(a, a)), kNormEps);
}

void Tape::replay() {
  for (Node& n : nodes_)
    if (n.op != Op::Leaf) eval(n);
}

void Tape::truncate(int mark) {
  if (mark < 0 || mark > int(nodes_.size()))
    throw ContractError("truncate: mark out of range");
  nodes_.resize(std::size_t(mark));
}

std::vector<std::vector<double>> Tape::backward(Value output,
                                                std::span<const Value> leaves) {
  if (!output.valid() || output.tape != this)
    throw ContractError("backward: output not on this tape");
  const Node& out = nodes_[output.id];
  if (!out.shape.scalar())
    throw ContractError("backward: output must be scalar");

  std::vector<std::vector<double>> adj(nodes_.size());
  adj[output.id] = {1.0};

  auto buf = [&](int id) -> std::vector<double>& {
    auto& v = adj[id];
    if (v.empty()) v.assign(nodes_[id].shape.size(), 0.0);
    return v;
  };

  for (int i = output.id; i >= 0; --i) {
    if (adj[i].empty()) continue;
    const Node& n = nodes_[i];
    const double* g = adj[i].data();
    const std::size_t len = n.shape.size();
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::MatMul: {
        const int rows = n.shape.rows, cols = n.shape.cols;
        const Shape& sa = nodes_[n.a].shape;
        const int inner = n.ta ? sa.rows : sa.cols;
        const double* av = nodes_[n.a].val.data();
        const double* bv = nodes_[n.b].val.data();
        if (!n.ta)
          k::gemm(buf(n.a).data(), g, false, bv, !n.tb, rows, cols, inner, true);
        else
          k::gemm(buf(n.a).data(), bv, n.tb, g, true, inner, cols, rows, true);
        if (!n.tb)
          k::gemm(buf(n.b).data(), av, !n.ta, g, false, inner, rows, cols, true);
        else
          k::gemm(buf(n.b).data(), g, true, av, n.ta, cols, rows, inner, true);
        break;
      }
      case Op::Add:
        k::serial::axpy(buf(n.a).data(), 1.0, g, len);
        k::serial::axpy(buf(n.b).data(), 1.0, g, len);
        break;
      case Op::Sub:
        k::serial::axpy(buf(n.a).data(), 1.0, g, len);
        k::serial::axpy(buf(n.b).data(), -1.0, g, len);
        break;
      case Op::Mul: {
        auto& da = buf(n.a);
        auto& db = buf(n.b);
        const double* av = nodes_[n.a].val.data();
        const double* bv = nodes_[n.b].val.data();
        for (std::size_t j = 0; j < len; ++j) {
          da[j] += g[j] * bv[j];
          db[j] += g[j] * av[j];
        }
        break;
      }
      case Op::Div: {
        auto& da = buf(n.a);
        auto& db = buf(n.b);
        const double* bv = nodes_[n.b].val.data();
        const double* yv = n.val.data();
        for (std::size_t j = 0; j < len; ++j) {
          da[j] += g[j] / bv[j];
          db[j] -= g[j] * yv[j] / bv[j];
        }
        break;
      }
      case Op::Scale:
        k::serial::axpy(buf(n.a).data(), n.c, g, len);
        break;
      case Op::AddConst:
        k::serial::axpy(buf(n.a).data(), 1.0, g, len);
        break;
      case Op::AddBias: {
        k::serial::axpy(buf(n.a).data(), 1.0, g, len);
        auto& db = buf(n.b);
        for (int r = 0; r < n.shape.rows; ++r)
          k::serial::axpy(db.data(), 1.0, g + std::size_t(r) * n.shape.cols,
                          n.shape.cols);
        break;
      }
      case Op::RowSum: {
        auto& da = buf(n.a);
        const Shape& sa = nodes_[n.a].shape;
        for (int r = 0; r < sa.rows; ++r)
          for (int cidx = 0; cidx < sa.cols; ++cidx)
            da[std::size_t(r) * sa.cols + cidx] += g[r];
        break;
      }
      case Op::ColSum: {
        auto& da = buf(n.a);
        const Shape& sa = nodes_[n.a].shape;
        for (int r = 0; r < sa.rows; ++r)
          k::serial::axpy(da.data() + std::size_t(r) * sa.cols, 1.0, g, sa.cols);
        break;
      }
      case Op::Sum: {
        auto& da = buf(n.a);
        for (double& x : da) x += g[0];
        break;
      }
      case Op::RowBroadcast: {
        auto& da = buf(n.a);
        for (int r = 0; r < n.shape.rows; ++r)
          k::serial::axpy(da.data(), 1.0, g + std::size_t(r) * n.shape.cols,
                          n.shape.cols);
        break;
      }
      case Op::ColBroadcast: {
        auto& da = buf(n.a);
        for (int r = 0; r < n.shape.rows; ++r)
          for (int cidx = 0; cidx < n.shape.cols; ++cidx)
            da[r] += g[std::size_t(r) * n.shape.cols + cidx];
        break;
      }
      case Op::ScalarBroadcast: {
        auto& da = buf(n.a);
        da[0] += k::serial::total_sum(g, len);
        break;
      }
      case Op::SqrtShift: {
        auto& da = buf(n.a);
        const double* yv = n.val.data();
        for (std::size_t j = 0; j < len; ++j) da[j] += 0.5 * g[j] / yv[j];
        break;
      }
      case Op::Softplus: {
        auto& da = buf(n.a);
        const double* av = nodes_[n.a].val.data();
        for (std::size_t j = 0; j < len; ++j)
          da[j] += g[j] * k::sigmoid_scalar(av[j], n.c);
        break;
      }
      case Op::Sigmoid: {
        auto& da = buf(n.a);
        const double* sv = n.val.data();
        for (std::size_t j = 0; j < len; ++j)
          da[j] += g[j] * n.c * sv[j] * (1.0 - sv[j]);
        break;
      }
    }
  }

  std::vector<std::vector<double>> grads;
  grads.reserve(leaves.size());
  for (const Value& leafv : leaves) {
    if (!leafv.valid() || leafv.tape != this)
      throw ContractError("backward: leaf not on this tape");
    auto& a = adj[leafv.id];
    if (a.empty()) a.assign(nodes_[leafv.id].shape.size(), 0.0);
    grads.push_back(std::move(a));
  }
  return grads;
}

std::vector<double> Tape::gradient_of(Value output, Value leafv) {
  Value ls[1] = {leafv};
  return backward(output, ls)[0];
}

namespace {

// id of the tangent/cotangent companion of a node, -1 meaning exactly zero.
struct SparseMap {
  std::vector<int> ids;
  int get(int i) const { return i < int(ids.size()) ? ids[i] : -1; }
  void set(int i, int v) {
    if (i >= int(ids.size())) ids.resize(i + 1, -1);
    ids[i] = v;
  }
};

int add_maybe(Tape& t, int x, int y) {
  if (x < 0) return y;
  if (y < 0) return x;
  return t.add(Value{&t, x}, Value{&t, y}).id;
}

// beta * s * (1 - s) * g for a recorded sigmoid s
Value sigmoid_chain(Tape& t, Value s, Value g, double beta) {
  Value one_minus = t.add_const(t.scale(s, -1.0), 1.0);
  return t.scale(t.mul(g, t.mul(s, one_minus)), beta);
}

} // namespace

Value jvp(Tape& tape, const TapedFn& fn, Value z, Value u) {
  if (!(u.shape() == z.shape()))
    throw ShapeError("jvp: tangent shape must match input shape");
  const int start = tape.size();
  Value out = fn(tape, z);
  const int end = tape.size();

  SparseMap tg;
  tg.set(z.id, u.id);

  for (int i = start; i < end; ++i) {
    const Node n = tape.node(i);  // copy: the tape vector may reallocate
    const int ga = n.a >= 0 ? tg.get(n.a) : -1;
    const int gb = n.b >= 0 ? tg.get(n.b) : -1;
    Value va{&tape, n.a}, vb{&tape, n.b};
    Value vga{&tape, ga}, vgb{&tape, gb};
    Value self{&tape, i};
    int t = -1;
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::MatMul: {
        int t1 = ga >= 0 ? tape.matmul(vga, vb, n.ta, n.tb).id : -1;
        int t2 = gb >= 0 ? tape.matmul(va, vgb, n.ta, n.tb).id : -1;
        t = add_maybe(tape, t1, t2);
        break;
      }
      case Op::Add:
        t = add_maybe(tape, ga, gb);
        break;
      case Op::Sub:
        if (ga >= 0 && gb >= 0) t = tape.sub(vga, vgb).id;
        else if (ga >= 0) t = ga;
        else if (gb >= 0) t = tape.scale(vgb, -1.0).id;
        break;
      case Op::Mul: {
        int t1 = ga >= 0 ? tape.mul(vga, vb).id : -1;
        int t2 = gb >= 0 ? tape.mul(va, vgb).id : -1;
        t = add_maybe(tape, t1, t2);
        break;
      }
      case Op::Div: {
        int t1 = ga >= 0 ? tape.div(vga, vb).id : -1;
        int t2 = gb >= 0 ? tape.scale(tape.div(tape.mul(self, vgb), vb), -1.0).id : -1;
        t = add_maybe(tape, t1, t2);
        break;
      }
      case Op::Scale:
        if (ga >= 0) t = tape.scale(vga, n.c).id;
        break;
      case Op::AddConst:
        t = ga;
        break;
      case Op::AddBias: {
        int t1 = ga;
        int t2 = gb >= 0 ? tape.row_broadcast(vgb, n.shape.rows).id : -1;
        if (t1 >= 0 && t2 >= 0) t = tape.add(Value{&tape, t1}, Value{&tape, t2}).id;
        else t = t1 >= 0 ? t1 : t2;
        break;
      }
      case Op::RowSum:
        if (ga >= 0) t = tape.row_sum(vga).id;
        break;
      case Op::ColSum:
        if (ga >= 0) t = tape.col_sum(vga).id;
        break;
      case Op::Sum:
        if (ga >= 0) t = tape.sum(vga).id;
        break;
      case Op::RowBroadcast:
        if (ga >= 0) t = tape.row_broadcast(vga, n.shape.rows).id;
        break;
      case Op::ColBroadcast:
        if (ga >= 0) t = tape.col_broadcast(vga, n.shape.cols).id;
        break;
      case Op::ScalarBroadcast:
        if (ga >= 0) t = tape.scalar_broadcast(vga, n.shape).id;
        break;
      case Op::SqrtShift:
        if (ga >= 0) t = tape.scale(tape.div(vga, self), 0.5).id;
        break;
      case Op::Softplus:
        if (ga >= 0) t = tape.mul(vga, tape.sigmoid(va, n.c)).id;
        break;
      case Op::Sigmoid:
        if (ga >= 0) t = sigmoid_chain(tape, self, vga, n.c).id;
        break;
    }
    if (t >= 0) tg.set(i, t);
  }

  int tid = tg.get(out.id);
  if (tid < 0)
    return tape.leaf(out.shape(), std::vector<double>(out.shape().size(), 0.0));
  return Value{&tape, tid};
}

Value vjp(Tape& tape, const TapedFn& fn, Value x, Value u) {
  const int start = tape.size();
  Value out = fn(tape, x);
  const int end = tape.size();
  if (!(u.shape() == out.shape()))
    throw ShapeError("vjp: cotangent shape must match output shape");

  SparseMap adj;
  adj.set(out.id, u.id);

  auto deposit = [&](int target, int contrib) {
    if (contrib < 0) return;
    adj.set(target, add_maybe(tape, adj.get(target), contrib));
  };
  auto wanted = [&](int target) {
    return target == x.id || target >= start;
  };

  for (int i = end - 1; i >= start; --i) {
    const int gid = adj.get(i);
    if (gid < 0) continue;
    const Node n = tape.node(i);
    Value g{&tape, gid};
    Value va{&tape, n.a}, vb{&tape, n.b};
    Value self{&tape, i};
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::MatMul:
        if (wanted(n.a)) {
          Value gA = n.ta ? tape.matmul(vb, g, n.tb, true)
                          : tape.matmul(g, vb, false, !n.tb);
          deposit(n.a, gA.id);
        }
        if (wanted(n.b)) {
          Value gB = n.tb ? tape.matmul(g, va, true, n.ta)
                          : tape.matmul(va, g, !n.ta, false);
          deposit(n.b, gB.id);
        }
        break;
      case Op::Add:
        if (wanted(n.a)) deposit(n.a, gid);
        if (wanted(n.b)) deposit(n.b, gid);
        break;
      case Op::Sub:
        if (wanted(n.a)) deposit(n.a, gid);
        if (wanted(n.b)) deposit(n.b, tape.scale(g, -1.0).id);
        break;
      case Op::Mul:
        if (wanted(n.a)) deposit(n.a, tape.mul(g, vb).id);
        if (wanted(n.b)) deposit(n.b, tape.mul(g, va).id);
        break;
      case Op::Div:
        if (wanted(n.a)) deposit(n.a, tape.div(g, vb).id);
        if (wanted(n.b))
          deposit(n.b, tape.scale(tape.div(tape.mul(g, self), vb), -1.0).id);
        break;
      case Op::Scale:
        if (wanted(n.a)) deposit(n.a, tape.scale(g, n.c).id);
        break;
      case Op::AddConst:
        if (wanted(n.a)) deposit(n.a, gid);
        break;
      case Op::AddBias:
        if (wanted(n.a)) deposit(n.a, gid);
        if (wanted(n.b)) deposit(n.b, tape.col_sum(g).id);
        break;
      case Op::RowSum:
        if (wanted(n.a)) deposit(n.a, tape.col_broadcast(g, tape.node(n.a).shape.cols).id);
        break;
      case Op::ColSum:
        if (wanted(n.a)) deposit(n.a, tape.row_broadcast(g, tape.node(n.a).shape.rows).id);
        break;
      case Op::Sum:
        if (wanted(n.a)) deposit(n.a, tape.scalar_broadcast(g, tape.node(n.a).shape).id);
        break;
      case Op::RowBroadcast:
        if (wanted(n.a)) deposit(n.a, tape.col_sum(g).id);
        break;
      case Op::ColBroadcast:
        if (wanted(n.a)) deposit(n.a, tape.row_sum(g).id);
        break;
      case Op::ScalarBroadcast:
        if (wanted(n.a)) deposit(n.a, tape.sum(g).id);
        break;
      case Op::SqrtShift:
        if (wanted(n.a)) deposit(n.a, tape.scale(tape.div(g, self), 0.5).id);
        break;
      case Op::Softplus:
        if (wanted(n.a)) deposit(n.a, tape.mul(g, tape.sigmoid(va, n.c)).id);
        break;
      case Op::Sigmoid:
        if (wanted(n.a)) deposit(n.a, sigmoid_chain(tape, self, g, n.c).id);
        break;
    }
  }

  int gx = adj.get(x.id);
  if (gx < 0)
    return tape.leaf(x.shape(), std::vector<double>(x.shape().size(), 0.0));
  return Value{&tape, gx};
}

std::vector<double> explicit_jacobian(Tape& tape, const TapedFn& fn,
                                      std::span<const double> point, int in_dim,
                                      int* out_dim_ptr) {
  if (in_dim > 64)
    throw ContractError("explicit_jacobian: input dimension too large (oracle use only)");
  if (int(point.size()) != in_dim)
    throw ShapeError("explicit_jacobian: point length != in_dim");
  std::vector<double> jac;
  int out_dim = 0;
  for (int col = 0; col < in_dim; ++col) {
    Value z = tape.leaf({1, in_dim}, point);
    std::vector<double> e(in_dim, 0.0);
    e[col] = 1.0;
    Value u = tape.leaf({1, in_dim}, e);
    Value t = jvp(tape, fn, z, u);
    const auto& tv = t.data();
    if (col == 0) {
      out_dim = int(tv.size());
      jac.assign(std::size_t(out_dim) * in_dim, 0.0);
    }
    for (int r = 0; r < out_dim; ++r) jac[std::size_t(r) * in_dim + col] = tv[r];
  }
  if (out_dim_ptr) *out_dim_ptr = out_dim;
  return jac;
}

} // namespace iae::ad
