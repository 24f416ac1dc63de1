#include "graphqa/tape.hpp"

#include <algorithm>
#include <cmath>

#include "graphqa/errors.hpp"

namespace graphqa {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!same_shape(a, b))
    throw ShapeError(std::string(op) + ": shapes " + shape_str(a.shape) + " and " +
                     shape_str(b.shape) + " do not match");
}

}  // namespace

NodeId Tape::push(Tensor value, const char* tag, std::function<void(Tape&)> bwd) {
  Node n;
  n.grad = Tensor(value.shape);
  n.value = std::move(value);
  n.op = tag;
  n.backward = std::move(bwd);
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

NodeId Tape::leaf(Tensor v, const char* tag) { return push(std::move(v), tag, {}); }

NodeId Tape::param(Param& p) {
  Param* ptr = &p;
  NodeId out = push(p.value, "param", {});
  nodes_[out].backward = [out, ptr](Tape& t) {
    const Tensor& g = t.grad(out);
    for (std::size_t i = 0; i < g.numel(); ++i) ptr->grad[i] += g[i];
  };
  return out;
}

NodeId Tape::detach(NodeId x) { return push(nodes_[x].value, "detach", {}); }

void Tape::backward(NodeId root) {
  if (!nodes_[root].value.is_scalar())
    throw ShapeError("backward root must be scalar, got shape " +
                     shape_str(nodes_[root].value.shape));
  nodes_[root].grad[0] += 1.0;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward(*this);
  }
}

std::size_t Tape::first_non_finite() const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (!nodes_[i].value.all_finite()) return i;
  return npos;
}

NodeId Tape::add(NodeId a, NodeId b) {
  require_same_shape(nodes_[a].value, nodes_[b].value, "add");
  Tensor out = nodes_[a].value;
  const Tensor& bv = nodes_[b].value;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += bv[i];
  NodeId id = push(std::move(out), "add", {});
  nodes_[id].backward = [id, a, b](Tape& t) {
    const Tensor& g = t.grad(id);
    Tensor& ga = t.grad(a);
    Tensor& gb = t.grad(b);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  };
  return id;
}

NodeId Tape::sub(NodeId a, NodeId b) {
  require_same_shape(nodes_[a].value, nodes_[b].value, "sub");
  Tensor out = nodes_[a].value;
  const Tensor& bv = nodes_[b].value;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= bv[i];
  NodeId id = push(std::move(out), "sub", {});
  nodes_[id].backward = [id, a, b](Tape& t) {
    const Tensor& g = t.grad(id);
    Tensor& ga = t.grad(a);
    Tensor& gb = t.grad(b);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      ga[i] += g[i];
      gb[i] -= g[i];
    }
  };
  return id;
}

NodeId Tape::mul(NodeId a, NodeId b) {
  require_same_shape(nodes_[a].value, nodes_[b].value, "elementwise_mul");
  Tensor out = nodes_[a].value;
  const Tensor& bv = nodes_[b].value;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= bv[i];
  NodeId id = push(std::move(out), "mul", {});
  nodes_[id].backward = [id, a, b](Tape& t) {
    const Tensor& g = t.grad(id);
    const Tensor& av = t.value(a);
    const Tensor& bv2 = t.value(b);
    Tensor& ga = t.grad(a);
    Tensor& gb = t.grad(b);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      ga[i] += g[i] * bv2[i];
      gb[i] += g[i] * av[i];
    }
  };
  return id;
}

NodeId Tape::scale(NodeId a, double k) {
  Tensor out = nodes_[a].value;
  for (double& v : out.data) v *= k;
  NodeId id = push(std::move(out), "scale", {});
  nodes_[id].backward = [id, a, k](Tape& t) {
    const Tensor& g = t.grad(id);
    Tensor& ga = t.grad(a);
    for (std::size_t i = 0; i < g.numel(); ++i) ga[i] += k * g[i];
  };
  return id;
}

NodeId Tape::smul(NodeId s, NodeId x) {
  if (!nodes_[s].value.is_scalar())
    throw ShapeError("smul: first operand must be scalar, got shape " +
                     shape_str(nodes_[s].value.shape));
  double sv = nodes_[s].value[0];
  Tensor out = nodes_[x].value;
  for (double& v : out.data) v *= sv;
  NodeId id = push(std::move(out), "smul", {});
  nodes_[id].backward = [id, s, x](Tape& t) {
    const Tensor& g = t.grad(id);
    const Tensor& xv = t.value(x);
    double sv2 = t.value(s)[0];
    Tensor& gs = t.grad(s);
    Tensor& gx = t.grad(x);
    for (std::size_t i = 0; i < g.numel(); ++i) {
      gs[0] += g[i] * xv[i];
      gx[i] += sv2 * g[i];
    }
  };
  return id;
}

NodeId Tape::sum(const std::vector<NodeId>& xs) {
  if (xs.empty()) throw DomainError("sum of empty node list");
  Tensor out = nodes_[xs[0]].value;
  for (std::size_t k = 1; k < xs.size(); ++k) {
    require_same_shape(out, nodes_[xs[k]].value, "sum");
    const Tensor& v = nodes_[xs[k]].value;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += v[i];
  }
  NodeId id = push(std::move(out), "sum", {});
  std::vector<NodeId> ins = xs;
  nodes_[id].backward = [id, ins](Tape& t) {
    const Tensor& g = t.grad(id);
    for (NodeId x : ins) {
      Tensor& gx = t.grad(x);
      for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += g[i];
    }
  };
  return id;
}

NodeId Tape::mean(const std::vector<NodeId>& xs) {
  return scale(sum(xs), 1.0 / static_cast<double>(xs.size()));
}

NodeId Tape::relu(NodeId x) {
  Tensor out = nodes_[x].value;
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  NodeId id = push(std::move(out), "relu", {});
  nodes_[id].backward = [id, x](Tape& t) {
    const Tensor& g = t.grad(id);
    const Tensor& xv = t.value(x);
    Tensor& gx = t.grad(x);
    for (std::size_t i = 0; i < g.numel(); ++i)
      if (xv[i] > 0.0) gx[i] += g[i];
  };
  return id;
}

NodeId Tape::sigmoid(NodeId x) {
  Tensor out = nodes_[x].value;
  for (double& v : out.data) {
    // split by sign for stability
    v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  NodeId id = push(std::move(out), "sigmoid", {});
  nodes_[id].backward = [id, x](Tape& t) {
    const Tensor& g = t.grad(id);
    const Tensor& y = t.value(id);
    Tensor& gx = t.grad(x);
    for (std::size_t i = 0; i < g.numel(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
  };
  return id;
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& A = nodes_[a].value;
  const Tensor& B = nodes_[b].value;
  if (!A.is_matrix() || !B.is_matrix() || A.cols() != B.rows())
    throw ShapeError("matmul: shapes " + shape_str(A.shape) + " and " + shape_str(B.shape) +
                     " are incompatible");
  std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  Tensor C = Tensor::mat(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      double aip = A.at(i, p);
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) C.at(i, j) += aip * B.at(p, j);
    }
  NodeId id = push(std::move(C), "matmul", {});
  nodes_[id].backward = [id, a, b, m, k, n](Tape& t) {
    const Tensor& g = t.grad(id);
    const Tensor& A2 = t.value(a);
    const Tensor& B2 = t.value(b);
    Tensor& ga = t.grad(a);
    Tensor& gb = t.grad(b);
    // dA = g . B^T
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double gij = g.at(i, j);
        if (gij == 0.0) continue;
        for (std::size_t p = 0; p < k; ++p) ga.at(i, p) += gij * B2.at(p, j);
      }
    // dB = A^T . g
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t i = 0; i < m; ++i) {
        double aip = A2.at(i, p);
        if (aip == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) gb.at(p, j) += aip * g.at(i, j);
      }
  };
  return id;
}

NodeId Tape::matvec(NodeId w, NodeId v) {
  const Tensor& W = nodes_[w].value;
  const Tensor& x = nodes_[v].value;
  if (!W.is_matrix() || !x.is_vector() || W.cols() != x.numel())
    throw ShapeError("matvec: shapes " + shape_str(W.shape) + " and " + shape_str(x.shape) +
                     " are incompatible");
  std::size_t m = W.rows(), n = W.cols();
  Tensor out(Shape{m});
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* wrow = &W.data[i * n];
    for (std::size_t j = 0; j < n; ++j) acc += wrow[j] * x[j];
    out[i] = acc;
  }
  NodeId id = push(std::move(out), "matvec", {});
  nodes_[id].backward = [id, w, v, m, n](Tape& t) {
    const Tensor& g = t.grad(id);
    const Tensor& W2 = t.value(w);
    const Tensor& x2 = t.value(v);
    Tensor& gw = t.grad(w);
    Tensor& gx = t.grad(v);
    for (std::size_t i = 0; i < m; ++i) {
      double gi = g[i];
      if (gi == 0.0) continue;
      double* gwrow = &gw.data[i * n];
      const double* wrow = &W2.data[i * n];
      for (std::size_t j = 0; j < n; ++j) {
        gwrow[j] += gi * x2[j];
        gx[j] += gi * wrow[j];
      }
    }
  };
  return id;
}

NodeId Tape::vecmat(NodeId v, NodeId w) {
  const Tensor& x = nodes_[v].value;
  const Tensor& W = nodes_[w].value;
  if (!x.is_vector() || !W.is_matrix() || x.numel() != W.rows())
    throw ShapeError("vecmat: shapes " + shape_str(x.shape) + " and " + shape_str(W.shape) +
                     " are incompatible");
  std::size_t m = W.rows(), n = W.cols();
  Tensor out(Shape{n});
  for (std::size_t i = 0; i < m; ++i) {
    double xi = x[i];
    if (xi == 0.0) continue;
    const double* wrow = &W.data[i * n];
    for (std::size_t j = 0; j < n; ++j) out[j] += xi * wrow[j];
  }
  NodeId id = push(std::move(out), "vecmat", {});
  nodes_[id].backward = [id, v, w, m, n](Tape& t) {
    const Tensor& g = t.grad(id);
    const Tensor& x2 = t.value(v);
    const Tensor& W2 = t.value(w);
    Tensor& gx = t.grad(v);
    Tensor& gw = t.grad(w);
    for (std::size_t i = 0; i < m; ++i) {
      const double* wrow = &W2.data[i * n];
      double* gwrow = &gw.data[i * n];
      double acc = 0.0;
      double xi = x2[i];
      for (std::size_t j = 0; j < n; ++j) {
        acc += wrow[j] * g[j];
        gwrow[j] += xi * g[j];
      }
      gx[i] += acc;
    }
  };
  return id;
}

NodeId Tape::dot(NodeId a, NodeId b) {
  const Tensor& x = nodes_[a].value;
  const Tensor& y = nodes_[b].value;
  require_same_shape(x, y, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < x.numel(); ++i) acc += x[i] * y[i];
  NodeId id = push(Tensor::scalar(acc), "dot", {});
  nodes_[id].backward = [id, a, b](Tape& t) {
    double g = t.grad(id)[0];
    const Tensor& x2 = t.value(a);
    const Tensor& y2 = t.value(b);
    Tensor& ga = t.grad(a);
    Tensor& gb = t.grad(b);
    for (std::size_t i = 0; i < x2.numel(); ++i) {
      ga[i] += g * y2[i];
      gb[i] += g * x2[i];
    }
  };
  return id;
}

NodeId Tape::concat(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw DomainError("concat of empty sequence");
  std::size_t total = 0;
  for (NodeId p : parts) {
    const Tensor& v = nodes_[p].value;
    if (!v.is_vector())
      throw ShapeError("concat: parts must be vectors, got shape " + shape_str(v.shape));
    total += v.numel();
  }
  Tensor out(Shape{total});
  std::size_t off = 0;
  for (NodeId p : parts) {
    const Tensor& v = nodes_[p].value;
    std::copy(v.data.begin(), v.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(off));
    off += v.numel();
  }
  NodeId id = push(std::move(out), "concat", {});
  std::vector<NodeId> ins = parts;
  nodes_[id].backward = [id, ins](Tape& t) {
    const Tensor& g = t.grad(id);
    std::size_t off2 = 0;
    for (NodeId p : ins) {
      Tensor& gp = t.grad(p);
      for (std::size_t i = 0; i < gp.numel(); ++i) gp[i] += g[off2 + i];
      off2 += gp.numel();
    }
  };
  return id;
}

NodeId Tape::index(NodeId v, std::size_t i) {
  const Tensor& x = nodes_[v].value;
  if (i >= x.numel())
    throw DomainError("index " + std::to_string(i) + " out of range for shape " +
                      shape_str(x.shape));
  NodeId id = push(Tensor::scalar(x[i]), "index", {});
  nodes_[id].backward = [id, v, i](Tape& t) { t.grad(v)[i] += t.grad(id)[0]; };
  return id;
}

NodeId Tape::row(NodeId m, std::size_t r) {
  const Tensor& M = nodes_[m].value;
  if (!M.is_matrix() || r >= M.rows())
    throw DomainError("row " + std::to_string(r) + " out of range for shape " +
                      shape_str(M.shape));
  std::size_t c = M.cols();
  Tensor out(Shape{c});
  for (std::size_t j = 0; j < c; ++j) out[j] = M.at(r, j);
  NodeId id = push(std::move(out), "row", {});
  nodes_[id].backward = [id, m, r, c](Tape& t) {
    const Tensor& g = t.grad(id);
    Tensor& gm = t.grad(m);
    for (std::size_t j = 0; j < c; ++j) gm.data[r * c + j] += g[j];
  };
  return id;
}

NodeId Tape::stack_rows(const std::vector<NodeId>& rows) {
  if (rows.empty()) throw DomainError("stack_rows of empty sequence");
  std::size_t d = nodes_[rows[0]].value.numel();
  for (NodeId r : rows) {
    const Tensor& v = nodes_[r].value;
    if (!v.is_vector() || v.numel() != d)
      throw ShapeError("stack_rows: all rows must be vectors of length " + std::to_string(d) +
                       ", got " + shape_str(v.shape));
  }
  Tensor out = Tensor::mat(rows.size(), d);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Tensor& v = nodes_[rows[r]].value;
    std::copy(v.data.begin(), v.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(r * d));
  }
  NodeId id = push(std::move(out), "stack_rows", {});
  std::vector<NodeId> ins = rows;
  nodes_[id].backward = [id, ins, d](Tape& t) {
    const Tensor& g = t.grad(id);
    for (std::size_t r = 0; r < ins.size(); ++r) {
      Tensor& gr = t.grad(ins[r]);
      for (std::size_t j = 0; j < d; ++j) gr[j] += g.data[r * d + j];
    }
  };
  return id;
}

NodeId Tape::softmax(NodeId v) {
  const Tensor& x = nodes_[v].value;
  if (!x.is_vector()) throw ShapeError("softmax expects a vector, got " + shape_str(x.shape));
  Tensor out = Tensor::vec(softmax_values(x.data));
  NodeId id = push(std::move(out), "softmax", {});
  nodes_[id].backward = [id, v](Tape& t) {
    const Tensor& g = t.grad(id);
    const Tensor& y = t.value(id);
    Tensor& gx = t.grad(v);
    double gy = 0.0;
    for (std::size_t i = 0; i < y.numel(); ++i) gy += g[i] * y[i];
    for (std::size_t i = 0; i < y.numel(); ++i) gx[i] += y[i] * (g[i] - gy);
  };
  return id;
}

namespace {
// log(sum(exp(x))) with max subtraction
double logsumexp(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i) m = std::max(m, x[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i] - m);
  return m + std::log(s);
}
}  // namespace

NodeId Tape::cross_entropy(NodeId logits, std::size_t label) {
  const Tensor& x = nodes_[logits].value;
  if (!x.is_vector()) throw ShapeError("cross_entropy expects vector logits, got " +
                                       shape_str(x.shape));
  if (label >= x.numel())
    throw DomainError("label " + std::to_string(label) + " out of range for " +
                      std::to_string(x.numel()) + " classes");
  double lse = logsumexp(x.data.data(), x.numel());
  NodeId id = push(Tensor::scalar(lse - x[label]), "cross_entropy", {});
  nodes_[id].backward = [id, logits, label](Tape& t) {
    double g = t.grad(id)[0];
    const Tensor& x2 = t.value(logits);
    Tensor& gx = t.grad(logits);
    std::vector<double> p = softmax_values(x2.data);
    for (std::size_t i = 0; i < p.size(); ++i)
      gx[i] += g * (p[i] - (i == label ? 1.0 : 0.0));
  };
  return id;
}

NodeId Tape::cross_entropy_rows(NodeId logits, const std::vector<std::size_t>& labels) {
  const Tensor& X = nodes_[logits].value;
  if (!X.is_matrix())
    throw ShapeError("cross_entropy_rows expects matrix logits, got " + shape_str(X.shape));
  std::size_t n = X.rows(), c = X.cols();
  if (labels.size() != n)
    throw DomainError("cross_entropy_rows: " + std::to_string(labels.size()) + " labels for " +
                      std::to_string(n) + " rows");
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (labels[r] >= c)
      throw DomainError("label " + std::to_string(labels[r]) + " out of range for " +
                        std::to_string(c) + " classes");
    total += logsumexp(&X.data[r * c], c) - X.at(r, labels[r]);
  }
  NodeId id = push(Tensor::scalar(total / static_cast<double>(n)), "cross_entropy_rows", {});
  std::vector<std::size_t> ls = labels;
  nodes_[id].backward = [id, logits, ls, n, c](Tape& t) {
    double g = t.grad(id)[0] / static_cast<double>(n);
    const Tensor& X2 = t.value(logits);
    Tensor& gx = t.grad(logits);
    for (std::size_t r = 0; r < n; ++r) {
      std::vector<double> rowv(X2.data.begin() + static_cast<std::ptrdiff_t>(r * c),
                               X2.data.begin() + static_cast<std::ptrdiff_t>((r + 1) * c));
      std::vector<double> p = softmax_values(rowv);
      for (std::size_t j = 0; j < c; ++j)
        gx.data[r * c + j] += g * (p[j] - (j == ls[r] ? 1.0 : 0.0));
    }
  };
  return id;
}

NodeId Ctx::P(const std::string& name) {
  auto it = bound.find(name);
  if (it != bound.end()) return it->second;
  NodeId id = tape.param(params.get(name));
  bound[name] = id;
  return id;
}

GradCheckReport gradcheck(ParameterStore& store, const std::function<NodeId(Tape&)>& build,
                          double step) {
  auto eval = [&](void) -> double {
    Tape t;
    NodeId root = build(t);
    double f = t.value(root)[0];
    if (!std::isfinite(f)) throw DomainError("gradcheck: objective is not finite");
    return f;
  };

  store.zero_grads();
  {
    Tape t;
    NodeId root = build(t);
    if (!std::isfinite(t.value(root)[0]))
      throw DomainError("gradcheck: objective is not finite");
    t.backward(root);
  }
  // snapshot analytic gradients before perturbing
  std::vector<std::vector<double>> analytic;
  analytic.reserve(store.all().size());
  for (auto& p : store.all()) analytic.push_back(p->grad.data);

  GradCheckReport report;
  for (std::size_t pi = 0; pi < store.all().size(); ++pi) {
    Param& p = *store.all()[pi];
    for (std::size_t i = 0; i < p.value.numel(); ++i) {
      double saved = p.value[i];
      p.value[i] = saved + step;
      double fp = eval();
      p.value[i] = saved - step;
      double fm = eval();
      p.value[i] = saved;
      double numeric = (fp - fm) / (2.0 * step);
      double a = analytic[pi][i];
      double rel = std::abs(a - numeric) / std::max(1.0, std::abs(a));
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = p.name;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace graphqa
