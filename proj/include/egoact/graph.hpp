// Reverse-mode automatic differentiation on a tape of tensor ops.
//
// A Graph records every operation in creation order, which is already a
// topological order; backward() walks the tape once in reverse and
// accumulates gradients into each node. Parameters enter as named leaves and
// their gradients are harvested by name after backward().
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "egoact/common.hpp"
#include "egoact/tensor.hpp"

namespace egoact {

using NodeId = int;

namespace detail {

// C[m,n] += or = A[m,k] * B[k,n]
inline void matmul_raw(const double* a, const double* b, double* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    double* crow = c + static_cast<size_t>(i) * n;
    std::fill(crow, crow + n, 0.0);
    const double* arow = a + static_cast<size_t>(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      const double* brow = b + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

constexpr double kInvSqrt2 = 0.7071067811865476;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

inline double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

inline double gelu_grad(double x) {
  double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
  double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
  return cdf + x * pdf;
}

}  // namespace detail

class Graph {
 public:
  Graph() = default;

  // ---- leaves ----

  NodeId input(Tensor t) { return push(std::move(t), false, {}); }

  // leaf that participates in backward but is not a named parameter
  NodeId variable(Tensor t) {
    t.requires_grad = true;
    return push(std::move(t), true, {});
  }

  NodeId param(const std::string& name, const Tensor& value) {
    Tensor t = value;
    t.requires_grad = true;
    NodeId id = push(std::move(t), true, {});
    nodes_[id].param_name = name;
    return id;
  }

  // ---- ops ----

  NodeId matmul(NodeId a, NodeId b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    require(ta.ndim() == 2 && tb.ndim() == 2 && ta.cols() == tb.rows(),
            "matmul: shape mismatch " + shape_str(ta.shape) + " x " + shape_str(tb.shape));
    int m = ta.rows(), k = ta.cols(), n = tb.cols();
    Tensor out = Tensor::zeros({m, n});
    detail::matmul_raw(ta.data.data(), tb.data.data(), out.data.data(), m, k, n);
    return push(std::move(out), needs(a) || needs(b), {a, b},
                [a, b, m, k, n](Graph& g, const Node& node) {
                  const double* dc = node.grad.data();
                  if (g.needs(a)) {
                    const double* bd = g.val(b).data.data();
                    double* da = g.grad_buf(a);
                    for (int i = 0; i < m; ++i)
                      for (int kk = 0; kk < k; ++kk) {
                        const double* dcrow = dc + static_cast<size_t>(i) * n;
                        const double* brow = bd + static_cast<size_t>(kk) * n;
                        double s = 0.0;
                        for (int j = 0; j < n; ++j) s += dcrow[j] * brow[j];
                        da[static_cast<size_t>(i) * k + kk] += s;
                      }
                  }
                  if (g.needs(b)) {
                    const double* ad = g.val(a).data.data();
                    double* db = g.grad_buf(b);
                    for (int i = 0; i < m; ++i) {
                      const double* arow = ad + static_cast<size_t>(i) * k;
                      const double* dcrow = dc + static_cast<size_t>(i) * n;
                      for (int kk = 0; kk < k; ++kk) {
                        const double av = arow[kk];
                        double* dbrow = db + static_cast<size_t>(kk) * n;
                        for (int j = 0; j < n; ++j) dbrow[j] += av * dcrow[j];
                      }
                    }
                  }
                });
  }

  NodeId add(NodeId a, NodeId b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    require(ta.same_shape(tb), "add: shape mismatch");
    Tensor out = ta;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += tb.data[i];
    return push(std::move(out), needs(a) || needs(b), {a, b},
                [a, b](Graph& g, const Node& node) {
                  for (NodeId p : {a, b})
                    if (g.needs(p)) {
                      double* dp = g.grad_buf(p);
                      for (size_t i = 0; i < node.grad.size(); ++i) dp[i] += node.grad[i];
                    }
                });
  }

  // rows of m plus broadcast vector v
  NodeId add_rowwise(NodeId m, NodeId v) {
    const Tensor& tm = val(m);
    const Tensor& tv = val(v);
    require(tm.ndim() == 2 && tv.numel() == tm.cols(), "add_rowwise: shape mismatch");
    Tensor out = tm;
    int r = tm.rows(), c = tm.cols();
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) out.data[static_cast<size_t>(i) * c + j] += tv.data[j];
    return push(std::move(out), needs(m) || needs(v), {m, v},
                [m, v, r, c](Graph& g, const Node& node) {
                  if (g.needs(m)) {
                    double* dm = g.grad_buf(m);
                    for (size_t i = 0; i < node.grad.size(); ++i) dm[i] += node.grad[i];
                  }
                  if (g.needs(v)) {
                    double* dv = g.grad_buf(v);
                    for (int i = 0; i < r; ++i)
                      for (int j = 0; j < c; ++j) dv[j] += node.grad[static_cast<size_t>(i) * c + j];
                  }
                });
  }

  NodeId mul(NodeId a, NodeId b) {
    const Tensor& ta = val(a);
    const Tensor& tb = val(b);
    require(ta.same_shape(tb), "mul: shape mismatch");
    Tensor out = ta;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= tb.data[i];
    return push(std::move(out), needs(a) || needs(b), {a, b},
                [a, b](Graph& g, const Node& node) {
                  if (g.needs(a)) {
                    double* da = g.grad_buf(a);
                    const auto& vb = g.val(b).data;
                    for (size_t i = 0; i < node.grad.size(); ++i) da[i] += node.grad[i] * vb[i];
                  }
                  if (g.needs(b)) {
                    double* db = g.grad_buf(b);
                    const auto& va = g.val(a).data;
                    for (size_t i = 0; i < node.grad.size(); ++i) db[i] += node.grad[i] * va[i];
                  }
                });
  }

  NodeId scale(NodeId a, double s) {
    Tensor out = val(a);
    for (double& v : out.data) v *= s;
    return push(std::move(out), needs(a), {a}, [a, s](Graph& g, const Node& node) {
      if (!g.needs(a)) return;
      double* da = g.grad_buf(a);
      for (size_t i = 0; i < node.grad.size(); ++i) da[i] += s * node.grad[i];
    });
  }

  NodeId transpose(NodeId a) {
    const Tensor& ta = val(a);
    require(ta.ndim() == 2, "transpose: need 2D");
    int r = ta.rows(), c = ta.cols();
    Tensor out = Tensor::zeros({c, r});
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) out.data[static_cast<size_t>(j) * r + i] = ta.at(i, j);
    return push(std::move(out), needs(a), {a}, [a, r, c](Graph& g, const Node& node) {
      if (!g.needs(a)) return;
      double* da = g.grad_buf(a);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
          da[static_cast<size_t>(i) * c + j] += node.grad[static_cast<size_t>(j) * r + i];
    });
  }

  // numerically stable softmax over the last axis of a 2D tensor (per row)
  NodeId softmax_rows(NodeId a) {
    const Tensor& ta = val(a);
    require(ta.ndim() == 2, "softmax_rows: need 2D");
    require(ta.cols() >= 1, "softmax_rows: empty axis");
    int r = ta.rows(), c = ta.cols();
    Tensor out = Tensor::zeros({r, c});
    for (int i = 0; i < r; ++i) {
      const double* x = ta.data.data() + static_cast<size_t>(i) * c;
      double* y = out.data.data() + static_cast<size_t>(i) * c;
      double mx = x[0];
      for (int j = 1; j < c; ++j) mx = std::max(mx, x[j]);
      double sum = 0.0;
      for (int j = 0; j < c; ++j) {
        y[j] = std::exp(x[j] - mx);
        sum += y[j];
      }
      for (int j = 0; j < c; ++j) y[j] /= sum;
    }
    NodeId id = push(std::move(out), needs(a), {a}, [a, r, c](Graph& g, const Node& node) {
      if (!g.needs(a)) return;
      double* da = g.grad_buf(a);
      for (int i = 0; i < r; ++i) {
        const double* y = node.value.data.data() + static_cast<size_t>(i) * c;
        const double* dy = node.grad.data() + static_cast<size_t>(i) * c;
        double dot = 0.0;
        for (int j = 0; j < c; ++j) dot += dy[j] * y[j];
        for (int j = 0; j < c; ++j) da[static_cast<size_t>(i) * c + j] += y[j] * (dy[j] - dot);
      }
    });
    return id;
  }

  // per-row layer norm with population (1/n) variance
  NodeId layer_norm_rows(NodeId x, NodeId gamma, NodeId beta, double eps) {
    const Tensor& tx = val(x);
    require(tx.ndim() == 2, "layer_norm: need 2D");
    int r = tx.rows(), c = tx.cols();
    require(c >= 2, "layer_norm: need at least 2 features");
    require(val(gamma).numel() == c && val(beta).numel() == c, "layer_norm: gamma/beta size");
    require(eps > 0.0, "layer_norm: eps must be positive");
    Tensor out = Tensor::zeros({r, c});
    std::vector<double> norm(static_cast<size_t>(r) * c);  // (x - mean)/std, pre gamma/beta
    std::vector<double> inv_std(r);
    const auto& gm = val(gamma).data;
    const auto& bt = val(beta).data;
    for (int i = 0; i < r; ++i) {
      const double* xi = tx.data.data() + static_cast<size_t>(i) * c;
      double mean = 0.0;
      for (int j = 0; j < c; ++j) mean += xi[j];
      mean /= c;
      double var = 0.0;
      for (int j = 0; j < c; ++j) var += (xi[j] - mean) * (xi[j] - mean);
      var /= c;
      double is = 1.0 / std::sqrt(var + eps);
      inv_std[i] = is;
      for (int j = 0; j < c; ++j) {
        double n = (xi[j] - mean) * is;
        norm[static_cast<size_t>(i) * c + j] = n;
        out.data[static_cast<size_t>(i) * c + j] = gm[j] * n + bt[j];
      }
    }
    return push(std::move(out), needs(x) || needs(gamma) || needs(beta), {x, gamma, beta},
                [x, gamma, beta, r, c, norm = std::move(norm),
                 inv_std = std::move(inv_std)](Graph& g, const Node& node) {
                  const auto& gm = g.val(gamma).data;
                  for (int i = 0; i < r; ++i) {
                    const double* dy = node.grad.data() + static_cast<size_t>(i) * c;
                    const double* n = norm.data() + static_cast<size_t>(i) * c;
                    if (g.needs(gamma)) {
                      double* dg = g.grad_buf(gamma);
                      for (int j = 0; j < c; ++j) dg[j] += dy[j] * n[j];
                    }
                    if (g.needs(beta)) {
                      double* db = g.grad_buf(beta);
                      for (int j = 0; j < c; ++j) db[j] += dy[j];
                    }
                    if (g.needs(x)) {
                      double* dx = g.grad_buf(x);
                      double mean_h = 0.0, mean_hn = 0.0;
                      for (int j = 0; j < c; ++j) {
                        double h = dy[j] * gm[j];
                        mean_h += h;
                        mean_hn += h * n[j];
                      }
                      mean_h /= c;
                      mean_hn /= c;
                      for (int j = 0; j < c; ++j) {
                        double h = dy[j] * gm[j];
                        dx[static_cast<size_t>(i) * c + j] +=
                            inv_std[i] * (h - mean_h - n[j] * mean_hn);
                      }
                    }
                  }
                });
  }

  NodeId gelu(NodeId a) {
    Tensor out = val(a);
    for (double& v : out.data) v = detail::gelu(v);
    return push(std::move(out), needs(a), {a}, [a](Graph& g, const Node& node) {
      if (!g.needs(a)) return;
      double* da = g.grad_buf(a);
      const auto& x = g.val(a).data;
      for (size_t i = 0; i < node.grad.size(); ++i)
        da[i] += node.grad[i] * detail::gelu_grad(x[i]);
    });
  }

  NodeId sigmoid(NodeId a) {
    Tensor out = val(a);
    for (double& v : out.data) v = detail::stable_sigmoid(v);
    return push(std::move(out), needs(a), {a}, [a](Graph& g, const Node& node) {
      if (!g.needs(a)) return;
      double* da = g.grad_buf(a);
      const auto& y = node.value.data;
      for (size_t i = 0; i < node.grad.size(); ++i)
        da[i] += node.grad[i] * y[i] * (1.0 - y[i]);
    });
  }

  NodeId slice_cols(NodeId a, int c0, int c1) {
    const Tensor& ta = val(a);
    require(ta.ndim() == 2 && 0 <= c0 && c0 < c1 && c1 <= ta.cols(), "slice_cols: bad range");
    int r = ta.rows(), c = ta.cols(), w = c1 - c0;
    Tensor out = Tensor::zeros({r, w});
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < w; ++j) out.at(i, j) = ta.at(i, c0 + j);
    return push(std::move(out), needs(a), {a}, [a, r, c, c0, w](Graph& g, const Node& node) {
      if (!g.needs(a)) return;
      double* da = g.grad_buf(a);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < w; ++j)
          da[static_cast<size_t>(i) * c + c0 + j] += node.grad[static_cast<size_t>(i) * w + j];
    });
  }

  NodeId slice_rows(NodeId a, int r0, int r1) {
    const Tensor& ta = val(a);
    require(ta.ndim() == 2 && 0 <= r0 && r0 < r1 && r1 <= ta.rows(), "slice_rows: bad range");
    int c = ta.cols(), h = r1 - r0;
    Tensor out = Tensor::zeros({h, c});
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < c; ++j) out.at(i, j) = ta.at(r0 + i, j);
    return push(std::move(out), needs(a), {a}, [a, c, r0, h](Graph& g, const Node& node) {
      if (!g.needs(a)) return;
      double* da = g.grad_buf(a);
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < c; ++j)
          da[static_cast<size_t>(r0 + i) * c + j] += node.grad[static_cast<size_t>(i) * c + j];
    });
  }

  NodeId concat_cols(const std::vector<NodeId>& parts) {
    require(!parts.empty(), "concat_cols: empty");
    int r = val(parts[0]).rows();
    int total = 0;
    bool ng = false;
    for (NodeId p : parts) {
      require(val(p).ndim() == 2 && val(p).rows() == r, "concat_cols: row mismatch");
      total += val(p).cols();
      ng = ng || needs(p);
    }
    Tensor out = Tensor::zeros({r, total});
    int off = 0;
    for (NodeId p : parts) {
      const Tensor& tp = val(p);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < tp.cols(); ++j) out.at(i, off + j) = tp.at(i, j);
      off += tp.cols();
    }
    return push(std::move(out), ng, parts, [parts, r, total](Graph& g, const Node& node) {
      int off = 0;
      for (NodeId p : parts) {
        int w = g.val(p).cols();
        if (g.needs(p)) {
          double* dp = g.grad_buf(p);
          for (int i = 0; i < r; ++i)
            for (int j = 0; j < w; ++j)
              dp[static_cast<size_t>(i) * w + j] +=
                  node.grad[static_cast<size_t>(i) * total + off + j];
        }
        off += w;
      }
    });
  }

  NodeId concat_rows(const std::vector<NodeId>& parts) {
    require(!parts.empty(), "concat_rows: empty");
    int c = val(parts[0]).cols();
    int total = 0;
    bool ng = false;
    for (NodeId p : parts) {
      require(val(p).ndim() == 2 && val(p).cols() == c, "concat_rows: col mismatch");
      total += val(p).rows();
      ng = ng || needs(p);
    }
    Tensor out = Tensor::zeros({total, c});
    int off = 0;
    for (NodeId p : parts) {
      const Tensor& tp = val(p);
      for (int i = 0; i < tp.rows(); ++i)
        for (int j = 0; j < c; ++j) out.at(off + i, j) = tp.at(i, j);
      off += tp.rows();
    }
    return push(std::move(out), ng, parts, [parts, c](Graph& g, const Node& node) {
      int off = 0;
      for (NodeId p : parts) {
        int h = g.val(p).rows();
        if (g.needs(p)) {
          double* dp = g.grad_buf(p);
          for (int i = 0; i < h; ++i)
            for (int j = 0; j < c; ++j)
              dp[static_cast<size_t>(i) * c + j] +=
                  node.grad[static_cast<size_t>(off + i) * c + j];
        }
        off += h;
      }
    });
  }

  NodeId gather_rows(NodeId a, std::vector<int> rows) {
    const Tensor& ta = val(a);
    require(ta.ndim() == 2, "gather_rows: need 2D");
    int c = ta.cols();
    for (int r : rows) require(0 <= r && r < ta.rows(), "gather_rows: index out of range");
    Tensor out = Tensor::zeros({static_cast<int>(rows.size()), c});
    for (size_t i = 0; i < rows.size(); ++i)
      for (int j = 0; j < c; ++j) out.at(static_cast<int>(i), j) = ta.at(rows[i], j);
    return push(std::move(out), needs(a), {a},
                [a, c, rows = std::move(rows)](Graph& g, const Node& node) {
                  if (!g.needs(a)) return;
                  double* da = g.grad_buf(a);
                  for (size_t i = 0; i < rows.size(); ++i)
                    for (int j = 0; j < c; ++j)
                      da[static_cast<size_t>(rows[i]) * c + j] += node.grad[i * c + j];
                });
  }

  NodeId mean_all(NodeId a) {
    const Tensor& ta = val(a);
    require(ta.numel() > 0, "mean_all: empty tensor");
    double s = 0.0;
    for (double v : ta.data) s += v;
    double inv = 1.0 / static_cast<double>(ta.numel());
    return push(Tensor::scalar(s * inv), needs(a), {a}, [a, inv](Graph& g, const Node& node) {
      if (!g.needs(a)) return;
      double* da = g.grad_buf(a);
      double d = node.grad[0] * inv;
      for (size_t i = 0; i < g.val(a).data.size(); ++i) da[i] += d;
    });
  }

  NodeId sum_all(NodeId a) {
    const Tensor& ta = val(a);
    double s = 0.0;
    for (double v : ta.data) s += v;
    return push(Tensor::scalar(s), needs(a), {a}, [a](Graph& g, const Node& node) {
      if (!g.needs(a)) return;
      double* da = g.grad_buf(a);
      for (size_t i = 0; i < g.val(a).data.size(); ++i) da[i] += node.grad[0];
    });
  }

  // mean absolute difference against a constant target (L1 regression loss)
  NodeId mean_abs_diff(NodeId a, Tensor target) {
    const Tensor& ta = val(a);
    require(ta.same_shape(target), "mean_abs_diff: shape mismatch");
    require(ta.numel() > 0, "mean_abs_diff: empty tensor");
    double s = 0.0;
    for (size_t i = 0; i < ta.data.size(); ++i) s += std::abs(ta.data[i] - target.data[i]);
    double inv = 1.0 / static_cast<double>(ta.numel());
    return push(Tensor::scalar(s * inv), needs(a), {a},
                [a, inv, target = std::move(target)](Graph& g, const Node& node) {
                  if (!g.needs(a)) return;
                  double* da = g.grad_buf(a);
                  const auto& x = g.val(a).data;
                  double d = node.grad[0] * inv;
                  for (size_t i = 0; i < x.size(); ++i) {
                    double diff = x[i] - target.data[i];
                    if (diff > 0.0)
                      da[i] += d;
                    else if (diff < 0.0)
                      da[i] -= d;
                  }
                });
  }

  // weighted sum of per-row cross entropies computed from logits via
  // log-sum-exp; caller folds any normalization into the weights
  NodeId cross_entropy_rows(NodeId logits, std::vector<int> targets, std::vector<double> weights) {
    const Tensor& tl = val(logits);
    require(tl.ndim() == 2, "cross_entropy: need 2D logits");
    int r = tl.rows(), c = tl.cols();
    require(static_cast<int>(targets.size()) == r && static_cast<int>(weights.size()) == r,
            "cross_entropy: targets/weights length mismatch");
    for (int t : targets) require(0 <= t && t < c, "cross_entropy: target out of range");
    double total = 0.0;
    for (int i = 0; i < r; ++i) {
      const double* x = tl.data.data() + static_cast<size_t>(i) * c;
      double mx = x[0];
      for (int j = 1; j < c; ++j) mx = std::max(mx, x[j]);
      double sum = 0.0;
      for (int j = 0; j < c; ++j) sum += std::exp(x[j] - mx);
      double lse = mx + std::log(sum);
      total += weights[i] * (lse - x[targets[i]]);
    }
    return push(Tensor::scalar(total), needs(logits), {logits},
                [logits, r, c, targets = std::move(targets),
                 weights = std::move(weights)](Graph& g, const Node& node) {
                  if (!g.needs(logits)) return;
                  double* dl = g.grad_buf(logits);
                  const Tensor& tl = g.val(logits);
                  double d = node.grad[0];
                  for (int i = 0; i < r; ++i) {
                    const double* x = tl.data.data() + static_cast<size_t>(i) * c;
                    double mx = x[0];
                    for (int j = 1; j < c; ++j) mx = std::max(mx, x[j]);
                    double sum = 0.0;
                    for (int j = 0; j < c; ++j) sum += std::exp(x[j] - mx);
                    for (int j = 0; j < c; ++j) {
                      double p = std::exp(x[j] - mx) / sum;
                      double delta = (j == targets[i]) ? 1.0 : 0.0;
                      dl[static_cast<size_t>(i) * c + j] += d * weights[i] * (p - delta);
                    }
                  }
                });
  }

  // ---- backward ----

  void backward(NodeId loss) {
    require(loss >= 0 && loss < static_cast<int>(nodes_.size()), "backward: bad node");
    require(val(loss).numel() == 1, "backward: loss must be a scalar");
    for (Node& n : nodes_) {
      n.grad.assign(n.value.data.size(), 0.0);
    }
    nodes_[loss].grad[0] = 1.0;
    // reverse topological order == reverse tape order; each node exactly once
    for (int i = loss; i >= 0; --i) {
      Node& n = nodes_[i];
      if (n.back && n.needs_grad) n.back(*this, n);
    }
  }

  // ---- access ----

  const Tensor& value(NodeId id) const { return nodes_[id].value; }

  Tensor grad(NodeId id) const {
    const Node& n = nodes_[id];
    require(!n.grad.empty(), "grad: backward() has not run");
    return Tensor(n.value.shape, n.grad);
  }

  // parameter gradients accumulated by name (a name may back several leaves)
  std::map<std::string, Tensor> named_grads() const {
    std::map<std::string, Tensor> out;
    for (const Node& n : nodes_) {
      if (n.param_name.empty()) continue;
      require(!n.grad.empty(), "named_grads: backward() has not run");
      auto it = out.find(n.param_name);
      if (it == out.end()) {
        out.emplace(n.param_name, Tensor(n.value.shape, n.grad));
      } else {
        for (size_t i = 0; i < n.grad.size(); ++i) it->second.data[i] += n.grad[i];
      }
    }
    return out;
  }

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    std::vector<NodeId> parents;
    std::function<void(Graph&, const Node&)> back;
    std::string param_name;
    bool needs_grad = false;
  };

  const Tensor& val(NodeId id) const { return nodes_[id].value; }
  bool needs(NodeId id) const { return nodes_[id].needs_grad; }
  double* grad_buf(NodeId id) { return nodes_[id].grad.data(); }

  NodeId push(Tensor value, bool needs_grad, std::vector<NodeId> parents,
              std::function<void(Graph&, const Node&)> back = {}) {
#if !defined(NDEBUG) || defined(EGOACT_FINITE_CHECKS)
    if (!value.all_finite()) throw std::runtime_error("graph op produced non-finite values");
#endif
    Node n;
    n.value = std::move(value);
    n.parents = std::move(parents);
    n.back = std::move(back);
    n.needs_grad = needs_grad;
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size()) - 1;
  }

  std::vector<Node> nodes_;
};

// plain-value softmax for places that work outside the graph
inline std::vector<double> softmax(const std::vector<double>& x) {
  require(!x.empty(), "softmax: empty input");
  double mx = x[0];
  for (double v : x) mx = std::max(mx, v);
  std::vector<double> y(x.size());
  double sum = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    y[i] = std::exp(x[i] - mx);
    sum += y[i];
  }
  for (double& v : y) v /= sum;
  return y;
}

}  // namespace egoact
