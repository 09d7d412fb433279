#include "newsrec/tape.hpp"

#include <cmath>
#include <string>

#include "newsrec/error.hpp"

namespace newsrec {

Tape::Node& Tape::node(Var v) {
  if (!v.valid() || static_cast<size_t>(v.id) >= nodes_.size()) {
    throw InvariantError("tape: dangling var id " + std::to_string(v.id));
  }
  return nodes_[static_cast<size_t>(v.id)];
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || static_cast<size_t>(v.id) >= nodes_.size()) {
    throw InvariantError("tape: dangling var id " + std::to_string(v.id));
  }
  return nodes_[static_cast<size_t>(v.id)];
}

std::vector<double>& Tape::grad_buf(int32_t id) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (n.grad.empty()) n.grad.assign(static_cast<size_t>(n.value.numel()), 0.0);
  return n.grad;
}

Var Tape::push(Tensor value, bool needs_grad, std::function<void(Tape&)> back) {
  nodes_.push_back(Node{std::move(value), {}, needs_grad, std::move(back)});
  return Var{static_cast<int32_t>(nodes_.size() - 1)};
}

double Tape::scalar_value(Var v) const {
  const Tensor& t = node(v).value;
  if (t.numel() != 1) {
    throw DimError("scalar_value: node has shape " + t.shape_str());
  }
  return t[0];
}

Var Tape::constant(Tensor value) {
  return push(std::move(value), false, nullptr);
}

Var Tape::zeros(std::vector<int64_t> shape) {
  return push(Tensor(std::move(shape)), false, nullptr);
}

Var Tape::param(Parameter& p) {
  auto it = param_memo_.find(&p);
  if (it != param_memo_.end()) return Var{it->second};
  Parameter* pp = &p;
  Var v = push(p.value, true, [pp](Tape& t) {
    // Runs after every consumer has contributed (leaf ids precede users).
    const auto& g = t.nodes_[static_cast<size_t>(t.flush_id_)].grad;
    pp->value.ensure_grad();
    auto& sink = pp->value.grad();
    for (size_t i = 0; i < g.size(); ++i) sink[i] += g[i];
  });
  param_memo_.emplace(pp, v.id);
  return v;
}

Var Tape::embedding_row(Parameter& table, int64_t row) {
  if (table.value.ndim() != 2) {
    throw DimError("embedding_row: parameter '" + table.name +
                   "' is not a matrix");
  }
  if (row < 0 || row >= table.value.rows()) {
    throw DomainError("embedding_row: row " + std::to_string(row) +
                      " out of range for " + table.name);
  }
  Parameter* pp = &table;
  const int64_t cols = table.value.cols();
  Var v = push(table.value.row_copy(row), true, [pp, row, cols](Tape& t) {
    const auto& g = t.nodes_[static_cast<size_t>(t.flush_id_)].grad;
    pp->value.ensure_grad();
    double* sink = pp->value.grad().data() + row * cols;
    for (int64_t i = 0; i < cols; ++i) sink[static_cast<size_t>(i)] += g[static_cast<size_t>(i)];
  });
  return v;
}

Var Tape::linear(Var x, Var w, Var b) {
  const Tensor& xv = node(x).value;
  const Tensor& wv = node(w).value;
  const Tensor* bv = b.valid() ? &node(b).value : nullptr;
  Tensor y = ops::linear(xv, wv, bv);
  const bool needs = node(x).needs_grad || node(w).needs_grad ||
                     (b.valid() && node(b).needs_grad);
  const int32_t xi = x.id, wi = w.id, bi = b.valid() ? b.id : -1;
  return push(std::move(y), needs, [xi, wi, bi](Tape& t) {
    const auto& gy = t.nodes_[static_cast<size_t>(t.flush_id_)].grad;
    const Tensor& xv = t.nodes_[static_cast<size_t>(xi)].value;
    const Tensor& wv = t.nodes_[static_cast<size_t>(wi)].value;
    const int64_t n = xv.numel();
    const int64_t m = wv.cols();
    if (t.nodes_[static_cast<size_t>(xi)].needs_grad) {
      auto& gx = t.grad_buf(xi);
      for (int64_t i = 0; i < n; ++i) {
        const double* wr = wv.row(i);
        double s = 0.0;
        for (int64_t j = 0; j < m; ++j) s += wr[j] * gy[static_cast<size_t>(j)];
        gx[static_cast<size_t>(i)] += s;
      }
    }
    if (t.nodes_[static_cast<size_t>(wi)].needs_grad) {
      auto& gw = t.grad_buf(wi);
      for (int64_t i = 0; i < n; ++i) {
        const double xi_v = xv[i];
        if (xi_v == 0.0) continue;
        double* gr = gw.data() + i * m;
        for (int64_t j = 0; j < m; ++j) gr[j] += xi_v * gy[static_cast<size_t>(j)];
      }
    }
    if (bi >= 0 && t.nodes_[static_cast<size_t>(bi)].needs_grad) {
      auto& gb = t.grad_buf(bi);
      for (int64_t j = 0; j < m; ++j) gb[static_cast<size_t>(j)] += gy[static_cast<size_t>(j)];
    }
  });
}

Var Tape::concat(std::span<const Var> parts) {
  if (parts.empty()) throw DomainError("concat: no parts");
  int64_t total = 0;
  bool needs = false;
  for (Var p : parts) {
    total += node(p).value.numel();
    needs = needs || node(p).needs_grad;
  }
  Tensor y({total});
  int64_t off = 0;
  for (Var p : parts) {
    const Tensor& pv = node(p).value;
    for (int64_t i = 0; i < pv.numel(); ++i) y[off + i] = pv[i];
    off += pv.numel();
  }
  std::vector<int32_t> ids(parts.size());
  for (size_t i = 0; i < parts.size(); ++i) ids[i] = parts[i].id;
  return push(std::move(y), needs, [ids](Tape& t) {
    const auto& gy = t.nodes_[static_cast<size_t>(t.flush_id_)].grad;
    int64_t off = 0;
    for (int32_t id : ids) {
      Node& p = t.nodes_[static_cast<size_t>(id)];
      const int64_t n = p.value.numel();
      if (p.needs_grad) {
        auto& gp = t.grad_buf(id);
        for (int64_t i = 0; i < n; ++i) {
          gp[static_cast<size_t>(i)] += gy[static_cast<size_t>(off + i)];
        }
      }
      off += n;
    }
  });
}

Var Tape::add(Var a, Var b) {
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  if (!av.same_shape(bv)) {
    throw DimError("add: shape mismatch " + av.shape_str() + " vs " +
                   bv.shape_str());
  }
  Tensor y(av.shape());
  for (int64_t i = 0; i < av.numel(); ++i) y[i] = av[i] + bv[i];
  const bool needs = node(a).needs_grad || node(b).needs_grad;
  const int32_t ai = a.id, bi = b.id;
  return push(std::move(y), needs, [ai, bi](Tape& t) {
    const auto& gy = t.nodes_[static_cast<size_t>(t.flush_id_)].grad;
    for (int32_t id : {ai, bi}) {
      if (!t.nodes_[static_cast<size_t>(id)].needs_grad) continue;
      auto& g = t.grad_buf(id);
      for (size_t i = 0; i < gy.size(); ++i) g[i] += gy[i];
    }
  });
}

Var Tape::sub(Var a, Var b) {
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  if (!av.same_shape(bv)) {
    throw DimError("sub: shape mismatch " + av.shape_str() + " vs " +
                   bv.shape_str());
  }
  Tensor y(av.shape());
  for (int64_t i = 0; i < av.numel(); ++i) y[i] = av[i] - bv[i];
  const bool needs = node(a).needs_grad || node(b).needs_grad;
  const int32_t ai = a.id, bi = b.id;
  return push(std::move(y), needs, [ai, bi](Tape& t) {
    const auto& gy = t.nodes_[static_cast<size_t>(t.flush_id_)].grad;
    if (t.nodes_[static_cast<size_t>(ai)].needs_grad) {
      auto& ga = t.grad_buf(ai);
      for (size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
    }
    if (t.nodes_[static_cast<size_t>(bi)].needs_grad) {
      auto& gb = t.grad_buf(bi);
      for (size_t i = 0; i < gy.size(); ++i) gb[i] -= gy[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  const Tensor& av = node(a).value;
  const Tensor& bv = node(b).value;
  if (!av.same_shape(bv)) {
    throw DimError("mul: shape mismatch " + av.shape_str() + " vs " +
                   bv.shape_str());
  }
  Tensor y(av.shape());
  for (int64_t i = 0; i < av.numel(); ++i) y[i] = av[i] * bv[i];
  const bool needs = node(a).needs_grad || node(b).needs_grad;
  const int32_t ai = a.id, bi = b.id;
  return push(std::move(y), needs, [ai, bi](Tape& t) {
    const auto& gy = t.nodes_[static_cast<size_t>(t.flush_id_)].grad;
    const Tensor& av = t.nodes_[static_cast<size_t>(ai)].value;
    const Tensor& bv = t.nodes_[static_cast<size_t>(bi)].value;
    if (t.nodes_[static_cast<size_t>(ai)].needs_grad) {
      auto& ga = t.grad_buf(ai);
      for (size_t i = 0; i < gy.size(); ++i) ga[i] += bv[static_cast<int64_t>(i)] * gy[i];
    }
    if (t.nodes_[static_cast<size_t>(bi)].needs_grad) {
      auto& gb = t.grad_buf(bi);
      for (size_t i = 0; i < gy.size(); ++i) gb[i] += av[static_cast<int64_t>(i)] * gy[i];
    }
  });
}

Var Tape::smul(Var s, Var v) {
  const Tensor& sv = node(s).value;
  const Tensor& vv = node(v).value;
  if (sv.numel() != 1) {
    throw DimError("smul: scale must be scalar, got " + sv.shape_str());
  }
  Tensor y(vv.shape());
  const double sc = sv[0];
  for (int64_t i = 0; i < vv.numel(); ++i) y[i] = sc * vv[i];
  const bool needs = node(s).needs_grad || node(v).needs_grad;
  const int32_t si = s.id, vi = v.id;
  return push(std::move(y), needs, [si, vi](Tape& t) {
    const auto& gy = t.nodes_[static_cast<size_t>(t.flush_id_)].grad;
    const Tensor& sv = t.nodes_[static_cast<size_t>(si)].value;
    const Tensor& vv = t.nodes_[static_cast<size_t>(vi)].value;
    if (t.nodes_[static_cast<size_t>(si)].needs_grad) {
      double acc = 0.0;
      for (size_t i = 0; i < gy.size(); ++i) acc += vv[static_cast<int64_t>(i)] * gy[i];
      t.grad_buf(si)[0] += acc;
    }
    if (t.nodes_[static_cast<size_t>(vi)].needs_grad) {
      auto& gv = t.grad_buf(vi);
      const double sc = sv[0];
      for (size_t i = 0; i < gy.size(); ++i) gv[i] += sc * gy[i];
    }
  });
}

Var Tape::mean(std::span<const Var> parts) {
  if (parts.empty()) throw DomainError("mean: no parts");
  const Tensor& first = node(parts[0]).value;
  Tensor y(first.shape());
  bool needs = false;
  for (Var p : parts) {
    const Tensor& pv = node(p).value;
    if (!pv.same_shape(first)) {
      throw DimError("mean: shape mismatch " + pv.shape_str() + " vs " +
                     first.shape_str());
    }
    for (int64_t i = 0; i < pv.numel(); ++i) y[i] += pv[i];
    needs = needs || node(p).needs_grad;
  }
  const double k = static_cast<double>(parts.size());
  for (int64_t i = 0; i < y.numel(); ++i) y[i] /= k;
  std::vector<int32_t> ids(parts.size());
  for (size_t i = 0; i < parts.size(); ++i) ids[i] = parts[i].id;
  return push(std::move(y), needs, [ids, k](Tape& t) {
    const auto& gy = t.nodes_[static_cast<size_t>(t.flush_id_)].grad;
    for (int32_t id : ids) {
      if (!t.nodes_[static_cast<size_t>(id)].needs_grad) continue;
      auto& g = t.grad_buf(id);
      for (size_t i = 0; i < gy.size(); ++i) g[i] += gy[i] / k;
    }
  });
}

Var Tape::sum(std::span<const Var> parts) {
  if (parts.empty()) throw DomainError("sum: no parts");
  const Tensor& first = node(parts[0]).value;
  Tensor y(first.shape());
  bool needs = false;
  for (Var p : parts) {
    const Tensor& pv = node(p).value;
    if (!pv.same_shape(first)) {
      throw DimError("sum: shape mismatch " + pv.shape_str() + " vs " +
                     first.shape_str());
    }
    for (int64_t i = 0; i < pv.numel(); ++i) y[i] += pv[i];
    needs = needs || node(p).needs_grad;
  }
  std::vector<int32_t> ids(parts.size());
  for (size_t i = 0; i < parts.size(); ++i) ids[i] = parts[i].id;
  return push(std::move(y), needs, [ids](Tape& t) {
    const auto& gy = t.nodes_[static_cast<size_t>(t.flush_id_)].grad;
    for (int32_t id : ids) {
      if (!t.nodes_[static_cast<size_t>(id)].needs_grad) continue;
      auto& g = t.grad_buf(id);
      for (size_t i = 0; i < gy.size(); ++i) g[i] += gy[i];
    }
  });
}

Var Tape::softmax(Var v) {
  Tensor y = ops::softmax(node(v).value);
  const bool needs = node(v).needs_grad;
  const int32_t vi = v.id;
  return push(std::move(y), needs, [vi](Tape& t) {
    Node& self = t.nodes_[static_cast<size_t>(t.flush_id_)];
    const auto& gy = self.grad;
    const Tensor& y = self.value;
    if (!t.nodes_[static_cast<size_t>(vi)].needs_grad) return;
    double ydg = 0.0;
    for (size_t i = 0; i < gy.size(); ++i) ydg += y[static_cast<int64_t>(i)] * gy[i];
    auto& gv = t.grad_buf(vi);
    for (size_t i = 0; i < gy.size(); ++i) {
      gv[i] += y[static_cast<int64_t>(i)] * (gy[i] - ydg);
    }
  });
}

Var Tape::tanh(Var v) {
  Tensor y = ops::tanh(node(v).value);
  const bool needs = node(v).needs_grad;
  const int32_t vi = v.id;
  return push(std::move(y), needs, [vi](Tape& t) {
    Node& self = t.nodes_[static_cast<size_t>(t.flush_id_)];
    const auto& gy = self.grad;
    const Tensor& y = self.value;
    if (!t.nodes_[static_cast<size_t>(vi)].needs_grad) return;
    auto& gv = t.grad_buf(vi);
    for (size_t i = 0; i < gy.size(); ++i) {
      const double yi = y[static_cast<int64_t>(i)];
      gv[i] += (1.0 - yi * yi) * gy[i];
    }
  });
}

Var Tape::dot(Var a, Var b) {
  const double y = ops::dot(node(a).value, node(b).value);
  const bool needs = node(a).needs_grad || node(b).needs_grad;
  const int32_t ai = a.id, bi = b.id;
  return push(Tensor::scalar(y), needs, [ai, bi](Tape& t) {
    const double g = t.nodes_[static_cast<size_t>(t.flush_id_)].grad[0];
    const Tensor& av = t.nodes_[static_cast<size_t>(ai)].value;
    const Tensor& bv = t.nodes_[static_cast<size_t>(bi)].value;
    if (t.nodes_[static_cast<size_t>(ai)].needs_grad) {
      auto& ga = t.grad_buf(ai);
      for (int64_t i = 0; i < bv.numel(); ++i) ga[static_cast<size_t>(i)] += bv[i] * g;
    }
    if (t.nodes_[static_cast<size_t>(bi)].needs_grad) {
      auto& gb = t.grad_buf(bi);
      for (int64_t i = 0; i < av.numel(); ++i) gb[static_cast<size_t>(i)] += av[i] * g;
    }
  });
}

Var Tape::pick(Var v, int64_t i) {
  const Tensor& vv = node(v).value;
  if (i < 0 || i >= vv.numel()) {
    throw DomainError("pick: index " + std::to_string(i) +
                      " out of range for " + vv.shape_str());
  }
  const bool needs = node(v).needs_grad;
  const int32_t vi = v.id;
  return push(Tensor::scalar(vv[i]), needs, [vi, i](Tape& t) {
    const double g = t.nodes_[static_cast<size_t>(t.flush_id_)].grad[0];
    if (!t.nodes_[static_cast<size_t>(vi)].needs_grad) return;
    t.grad_buf(vi)[static_cast<size_t>(i)] += g;
  });
}

Var Tape::logsumexp(Var v) {
  const Tensor& vv = node(v).value;
  if (vv.numel() == 0) throw DomainError("logsumexp: empty input");
  if (!vv.all_finite()) throw DomainError("logsumexp: non-finite input");
  double mx = vv[0];
  for (int64_t i = 1; i < vv.numel(); ++i) mx = std::max(mx, vv[i]);
  double s = 0.0;
  for (int64_t i = 0; i < vv.numel(); ++i) s += std::exp(vv[i] - mx);
  const double y = mx + std::log(s);
  const bool needs = node(v).needs_grad;
  const int32_t vi = v.id;
  return push(Tensor::scalar(y), needs, [vi](Tape& t) {
    const double g = t.nodes_[static_cast<size_t>(t.flush_id_)].grad[0];
    if (!t.nodes_[static_cast<size_t>(vi)].needs_grad) return;
    const Tensor sm = ops::softmax(t.nodes_[static_cast<size_t>(vi)].value);
    auto& gv = t.grad_buf(vi);
    for (int64_t i = 0; i < sm.numel(); ++i) gv[static_cast<size_t>(i)] += sm[i] * g;
  });
}

void Tape::backward(Var loss, double seed) {
  Node& ln = node(loss);
  if (ln.value.numel() != 1) {
    throw DimError("backward: loss node has shape " + ln.value.shape_str());
  }
  grad_buf(loss.id)[0] += seed;
  for (int32_t i = loss.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (!n.needs_grad || n.grad.empty() || !n.back) continue;
    flush_id_ = i;
    n.back(*this);
  }
}

Tensor finite_diff_grad(const ScalarFn& f, const Tensor& x, double eps) {
  if (eps <= 0.0) throw DomainError("finite_diff_grad: eps must be positive");
  Tensor g(x.shape());
  Tensor probe = x;
  for (int64_t i = 0; i < x.numel(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double up = f(probe);
    probe[i] = orig - eps;
    const double down = f(probe);
    probe[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw DomainError("finite_diff_grad: non-finite evaluation at coord " +
                        std::to_string(i));
    }
    g[i] = (up - down) / (2.0 * eps);
  }
  return g;
}

}  // namespace newsrec
