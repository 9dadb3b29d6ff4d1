#include "sensegen/tape.hpp"

#include <cmath>

#include "sensegen/errors.hpp"

namespace sensegen {

namespace {

void require_same_tape(Var a, Var b, const char* op) {
  if (a.tape == nullptr || b.tape == nullptr || a.tape != b.tape) {
    throw ContractError(std::string(op) + ": operands recorded on different tapes");
  }
}

void accumulate(Tensor& dst, const Tensor& delta) {
  double* d = dst.data();
  const double* s = delta.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

}  // namespace

const Tensor& Var::value() const {
  if (!valid()) throw ContractError("Var::value on invalid handle");
  return tape->value_of(id);
}

const Tensor& Gradients::at(Var v) const {
  if (!v.valid() || static_cast<std::size_t>(v.id) >= grads_.size()) {
    throw ContractError("Gradients::at: handle not from this tape");
  }
  return grads_[static_cast<std::size_t>(v.id)];
}

double Gradients::scalar_at(Var v) const {
  const Tensor& g = at(v);
  if (g.size() != 1) throw ContractError("Gradients::scalar_at: gradient is not scalar");
  return g[0];
}

Var Tape::leaf(Tensor value) { return push(std::move(value), BackFn()); }

Var Tape::push(Tensor value, BackFn back) {
  nodes_.push_back(Node{std::move(value), std::move(back)});
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Gradients Tape::backward(Var loss) const {
  if (loss.tape != this) throw ContractError("backward: loss from another tape");
  if (loss.value().size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " +
                        loss.value().shape_str());
  }
  std::vector<Tensor> grads;
  grads.reserve(nodes_.size());
  for (const Node& n : nodes_) grads.push_back(Tensor::zeros(n.value.shape()));
  grads[static_cast<std::size_t>(loss.id)][0] = 1.0;

  Tape& self = const_cast<Tape&>(*this);
  for (int id = loss.id; id >= 0; --id) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.back) n.back(self, grads[static_cast<std::size_t>(id)], grads);
  }
  return Gradients(std::move(grads));
}

Var matmul(Var a, Var b) {
  require_same_tape(a, b, "matmul");
  Tape& t = *a.tape;
  Tensor y = tops::matmul(a.value(), b.value());
  int aid = a.id, bid = b.id;
  return t.push(std::move(y), [aid, bid](Tape& tp, const Tensor& g, std::vector<Tensor>& grads) {
    const Tensor& A = tp.value_of(aid);
    const Tensor& B = tp.value_of(bid);
    if (B.rank() == 1) {
      accumulate(grads[static_cast<std::size_t>(aid)], tops::outer(g, B));
      accumulate(grads[static_cast<std::size_t>(bid)], tops::matvec_t(A, g));
    } else {
      accumulate(grads[static_cast<std::size_t>(aid)], tops::matmul_nt(g, B));
      accumulate(grads[static_cast<std::size_t>(bid)], tops::matmul_tn(A, g));
    }
  });
}

Var add(Var a, Var b) {
  require_same_tape(a, b, "add");
  Tape& t = *a.tape;
  Tensor y = tops::add(a.value(), b.value());
  int aid = a.id, bid = b.id;
  return t.push(std::move(y), [aid, bid](Tape&, const Tensor& g, std::vector<Tensor>& grads) {
    accumulate(grads[static_cast<std::size_t>(aid)], g);
    accumulate(grads[static_cast<std::size_t>(bid)], g);
  });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b, "sub");
  Tape& t = *a.tape;
  Tensor y = tops::sub(a.value(), b.value());
  int aid = a.id, bid = b.id;
  return t.push(std::move(y), [aid, bid](Tape&, const Tensor& g, std::vector<Tensor>& grads) {
    accumulate(grads[static_cast<std::size_t>(aid)], g);
    accumulate(grads[static_cast<std::size_t>(bid)], tops::axpb(g, -1.0, 0.0));
  });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b, "mul");
  Tape& t = *a.tape;
  Tensor y = tops::mul(a.value(), b.value());
  int aid = a.id, bid = b.id;
  return t.push(std::move(y), [aid, bid](Tape& tp, const Tensor& g, std::vector<Tensor>& grads) {
    accumulate(grads[static_cast<std::size_t>(aid)], tops::mul(g, tp.value_of(bid)));
    accumulate(grads[static_cast<std::size_t>(bid)], tops::mul(g, tp.value_of(aid)));
  });
}

Var div(Var a, Var b) {
  require_same_tape(a, b, "div");
  Tape& t = *a.tape;
  Tensor y = tops::div(a.value(), b.value());
  int aid = a.id, bid = b.id, yid = static_cast<int>(t.size());
  return t.push(std::move(y), [aid, bid, yid](Tape& tp, const Tensor& g, std::vector<Tensor>& grads) {
    const Tensor& B = tp.value_of(bid);
    const Tensor& Y = tp.value_of(yid);
    accumulate(grads[static_cast<std::size_t>(aid)], tops::div(g, B));
    // d(a/b)/db = -y/b
    accumulate(grads[static_cast<std::size_t>(bid)],
               tops::axpb(tops::div(tops::mul(g, Y), B), -1.0, 0.0));
  });
}

namespace {

template <typename DF>
Var unary(Var x, Tensor y, DF df) {
  // df(x_value, y_value) -> elementwise local derivative
  Tape& t = *x.tape;
  int xid = x.id, yid = static_cast<int>(t.size());
  return t.push(std::move(y), [xid, yid, df](Tape& tp, const Tensor& g, std::vector<Tensor>& grads) {
    const Tensor& X = tp.value_of(xid);
    const Tensor& Y = tp.value_of(yid);
    Tensor& dst = grads[static_cast<std::size_t>(xid)];
    double* d = dst.data();
    const double* gd = g.data();
    const double* xd = X.data();
    const double* yd = Y.data();
    for (std::size_t i = 0; i < dst.size(); ++i) d[i] += gd[i] * df(xd[i], yd[i]);
  });
}

}  // namespace

Var sigmoid(Var x) {
  return unary(x, tops::sigmoid(x.value()),
               [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var x) {
  return unary(x, tops::tanh(x.value()),
               [](double, double y) { return 1.0 - y * y; });
}

Var exp(Var x) {
  return unary(x, tops::exp(x.value()), [](double, double y) { return y; });
}

Var log(Var x) {
  return unary(x, tops::log(x.value()), [](double xv, double) { return 1.0 / xv; });
}

Var axpb(Var x, double a, double b) {
  return unary(x, tops::axpb(x.value(), a, b), [a](double, double) { return a; });
}

Var clamp_min(Var x, double lo) {
  return unary(x, tops::clamp_min(x.value(), lo),
               [lo](double xv, double) { return xv > lo ? 1.0 : 0.0; });
}

Var clamp(Var x, double lo, double hi) {
  return unary(x, tops::clamp(x.value(), lo, hi),
               [lo, hi](double xv, double) { return (xv > lo && xv < hi) ? 1.0 : 0.0; });
}

Var softmax(Var x) {
  Tape& t = *x.tape;
  Tensor y = tops::softmax(x.value());
  int xid = x.id, yid = static_cast<int>(t.size());
  return t.push(std::move(y), [xid, yid](Tape& tp, const Tensor& g, std::vector<Tensor>& grads) {
    const Tensor& Y = tp.value_of(yid);
    double dot = 0.0;
    for (std::size_t i = 0; i < Y.size(); ++i) dot += g[i] * Y[i];
    Tensor& dst = grads[static_cast<std::size_t>(xid)];
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += Y[i] * (g[i] - dot);
  });
}

Var log_sum_exp(Var x) {
  Tape& t = *x.tape;
  double y = tops::log_sum_exp(x.value());
  int xid = x.id, yid = static_cast<int>(t.size());
  return t.push(Tensor::scalar(y), [xid, yid](Tape& tp, const Tensor& g, std::vector<Tensor>& grads) {
    const Tensor& X = tp.value_of(xid);
    double y0 = tp.value_of(yid)[0];
    Tensor& dst = grads[static_cast<std::size_t>(xid)];
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[0] * std::exp(X[i] - y0);
  });
}

Var sum(Var x) {
  Tape& t = *x.tape;
  double y = tops::sum(x.value());
  int xid = x.id;
  return t.push(Tensor::scalar(y), [xid](Tape&, const Tensor& g, std::vector<Tensor>& grads) {
    Tensor& dst = grads[static_cast<std::size_t>(xid)];
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[0];
  });
}

Var slice(Var x, std::size_t offset, std::size_t len) {
  Tape& t = *x.tape;
  Tensor y = tops::slice(x.value(), offset, len);
  int xid = x.id;
  return t.push(std::move(y), [xid, offset, len](Tape&, const Tensor& g, std::vector<Tensor>& grads) {
    Tensor& dst = grads[static_cast<std::size_t>(xid)];
    for (std::size_t i = 0; i < len; ++i) dst[offset + i] += g[i];
  });
}

Var sub_bcast(Var vec, Var scalar) {
  require_same_tape(vec, scalar, "sub_bcast");
  if (scalar.value().size() != 1) {
    throw ShapeError("sub_bcast: scalar operand has shape " + scalar.value().shape_str());
  }
  Tape& t = *vec.tape;
  Tensor y = tops::axpb(vec.value(), 1.0, -scalar.value()[0]);
  int vid = vec.id, sid = scalar.id;
  return t.push(std::move(y), [vid, sid](Tape&, const Tensor& g, std::vector<Tensor>& grads) {
    accumulate(grads[static_cast<std::size_t>(vid)], g);
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) total += g[i];
    grads[static_cast<std::size_t>(sid)][0] -= total;
  });
}

}  // namespace sensegen
