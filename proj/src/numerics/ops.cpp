// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aesmpn/numerics/error.hpp"
#include "aesmpn/numerics/kernels.hpp"

namespace aesmpn::numerics {
namespace {

const kernels::KernelTable& kt() { return kernels::active(); }

void same_graph(Var a, Var b, const char* op) {
  if (!a.valid() || !b.valid() || &a.graph() != &b.graph()) {
    throw ContractError(std::string(op) + ": operands belong to different graphs");
  }
}

[[noreturn]] void shape_mismatch(const char* op, const Shape& a, const Shape& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_string(a) + " and " + shape_string(b));
}

enum class Broadcast { None, BiasRows };

Broadcast check_binary(const char* op, const Shape& a, const Shape& b) {
  if (a == b) return Broadcast::None;
  if (a.size() == 2 && b.size() == 1 && a[1] == b[0]) return Broadcast::BiasRows;
  shape_mismatch(op, a, b);
}

// Sum of the rows of g ([m x n]) accumulated into out ([n]).
void accumulate_row_sums(const Tensor& g, Tensor& out) {
  const std::size_t m = g.rows();
  const std::size_t n = g.cols();
  for (std::size_t r = 0; r < m; ++r) kt().axpy(n, 1.0, g.raw() + r * n, out.raw());
}

template <typename Fn>
Tensor map_values(const Tensor& x, Fn fn) {
  Tensor out(x.shape());
  const double* in = x.raw();
  double* o = out.raw();
  for (std::size_t i = 0; i < x.size(); ++i) o[i] = fn(in[i]);
  return out;
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double sorted_sum(std::span<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

Var matmul(Var a, Var b) {
  same_graph(a, b, "matmul");
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) shape_mismatch("matmul", sa, sb);
  const std::size_t m = sa[0], k = sa[1], n = sb[1];
  Tensor out({m, n});
  kt().gemm_nn(m, n, k, a.value().raw(), b.value().raw(), out.raw());
  return a.graph().record("matmul", std::move(out), {a.id(), b.id()},
                          [m, k, n](const Graph& g, std::size_t self, const Tensor& go, std::span<Tensor* const> gi) {
                            const Tensor& av = g.value(g.input(self, 0));
                            const Tensor& bv = g.value(g.input(self, 1));
                            if (gi[0]) kt().gemm_nt(m, k, n, go.raw(), bv.raw(), gi[0]->raw());
                            if (gi[1]) kt().gemm_tn(k, n, m, av.raw(), go.raw(), gi[1]->raw());
                          });
}

Var matmul_nt(Var a, Var b) {
  same_graph(a, b, "matmul_nt");
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[1]) shape_mismatch("matmul_nt", sa, sb);
  const std::size_t m = sa[0], k = sa[1], n = sb[0];
  Tensor out({m, n});
  kt().gemm_nt(m, n, k, a.value().raw(), b.value().raw(), out.raw());
  return a.graph().record("matmul_nt", std::move(out), {a.id(), b.id()},
                          [m, k, n](const Graph& g, std::size_t self, const Tensor& go, std::span<Tensor* const> gi) {
                            const Tensor& av = g.value(g.input(self, 0));
                            const Tensor& bv = g.value(g.input(self, 1));
                            if (gi[0]) kt().gemm_nn(m, k, n, go.raw(), bv.raw(), gi[0]->raw());
                            if (gi[1]) kt().gemm_tn(n, k, m, go.raw(), av.raw(), gi[1]->raw());
                          });
}

Var transpose(Var a) {
  const Shape& s = a.shape();
  if (s.size() != 2) throw DimensionError("transpose needs a matrix, got " + shape_string(s));
  const std::size_t m = s[0], n = s[1];
  Tensor out({n, m});
  const double* src = a.value().raw();
  double* dst = out.raw();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) dst[j * m + i] = src[i * n + j];
  return a.graph().record("transpose", std::move(out), {a.id()},
                          [m, n](const Graph&, std::size_t, const Tensor& go, std::span<Tensor* const> gi) {
                            double* dst = gi[0]->raw();
                            const double* src = go.raw();
                            for (std::size_t i = 0; i < m; ++i)
                              for (std::size_t j = 0; j < n; ++j) dst[i * n + j] += src[j * m + i];
                          });
}

Var add(Var a, Var b) {
  same_graph(a, b, "add");
  const Broadcast mode = check_binary("add", a.shape(), b.shape());
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(av.shape());
  if (mode == Broadcast::None) {
    kt().add(av.size(), av.raw(), bv.raw(), out.raw());
  } else {
    const std::size_t n = av.cols();
    for (std::size_t r = 0; r < av.rows(); ++r) kt().add(n, av.raw() + r * n, bv.raw(), out.raw() + r * n);
  }
  return a.graph().record("add", std::move(out), {a.id(), b.id()},
                          [mode](const Graph&, std::size_t, const Tensor& go, std::span<Tensor* const> gi) {
                            if (gi[0]) kt().axpy(go.size(), 1.0, go.raw(), gi[0]->raw());
                            if (!gi[1]) return;
                            if (mode == Broadcast::None) {
                              kt().axpy(go.size(), 1.0, go.raw(), gi[1]->raw());
                            } else {
                              accumulate_row_sums(go, *gi[1]);
                            }
                          });
}

Var sub(Var a, Var b) {
  same_graph(a, b, "sub");
  const Broadcast mode = check_binary("sub", a.shape(), b.shape());
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(av.shape());
  if (mode == Broadcast::None) {
    kt().sub(av.size(), av.raw(), bv.raw(), out.raw());
  } else {
    const std::size_t n = av.cols();
    for (std::size_t r = 0; r < av.rows(); ++r) kt().sub(n, av.raw() + r * n, bv.raw(), out.raw() + r * n);
  }
  return a.graph().record("sub", std::move(out), {a.id(), b.id()},
                          [mode](const Graph&, std::size_t, const Tensor& go, std::span<Tensor* const> gi) {
                            if (gi[0]) kt().axpy(go.size(), 1.0, go.raw(), gi[0]->raw());
                            if (!gi[1]) return;
                            if (mode == Broadcast::None) {
                              kt().axpy(go.size(), -1.0, go.raw(), gi[1]->raw());
                            } else {
                              Tensor neg = go;
                              for (double& v : neg.data()) v = -v;
                              accumulate_row_sums(neg, *gi[1]);
                            }
                          });
}

Var mul(Var a, Var b) {
  same_graph(a, b, "mul");
  const Broadcast mode = check_binary("mul", a.shape(), b.shape());
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor out(av.shape());
  const std::size_t n = av.cols();
  if (mode == Broadcast::None) {
    kt().mul(av.size(), av.raw(), bv.raw(), out.raw());
  } else {
    for (std::size_t r = 0; r < av.rows(); ++r) kt().mul(n, av.raw() + r * n, bv.raw(), out.raw() + r * n);
  }
  return a.graph().record(
      "mul", std::move(out), {a.id(), b.id()},
      [mode, n](const Graph& g, std::size_t self, const Tensor& go, std::span<Tensor* const> gi) {
        const Tensor& av = g.value(g.input(self, 0));
        const Tensor& bv = g.value(g.input(self, 1));
        Tensor tmp(go.shape());
        if (mode == Broadcast::None) {
          if (gi[0]) {
            kt().mul(go.size(), go.raw(), bv.raw(), tmp.raw());
            kt().axpy(go.size(), 1.0, tmp.raw(), gi[0]->raw());
          }
          if (gi[1]) {
            kt().mul(go.size(), go.raw(), av.raw(), tmp.raw());
            kt().axpy(go.size(), 1.0, tmp.raw(), gi[1]->raw());
          }
          return;
        }
        const std::size_t m = go.rows();
        if (gi[0]) {
          for (std::size_t r = 0; r < m; ++r) kt().mul(n, go.raw() + r * n, bv.raw(), tmp.raw() + r * n);
          kt().axpy(go.size(), 1.0, tmp.raw(), gi[0]->raw());
        }
        if (gi[1]) {
          kt().mul(go.size(), go.raw(), av.raw(), tmp.raw());
          accumulate_row_sums(tmp, *gi[1]);
        }
      });
}

Var scale(Var a, double factor) {
  Tensor out = map_values(a.value(), [factor](double v) { return v * factor; });
  return a.graph().record("scale", std::move(out), {a.id()},
                          [factor](const Graph&, std::size_t, const Tensor& go, std::span<Tensor* const> gi) {
                            kt().axpy(go.size(), factor, go.raw(), gi[0]->raw());
                          });
}

Var sigmoid(Var x) {
  Tensor out = map_values(x.value(), stable_sigmoid);
  return x.graph().record("sigmoid", std::move(out), {x.id()},
                          [](const Graph& g, std::size_t self, const Tensor& go, std::span<Tensor* const> gi) {
                            const double* y = g.value(self).raw();
                            double* dst = gi[0]->raw();
                            for (std::size_t i = 0; i < go.size(); ++i) dst[i] += go[i] * y[i] * (1.0 - y[i]);
                          });
}

Var tanh_op(Var x) {
  Tensor out = map_values(x.value(), [](double v) { return std::tanh(v); });
  return x.graph().record("tanh", std::move(out), {x.id()},
                          [](const Graph& g, std::size_t self, const Tensor& go, std::span<Tensor* const> gi) {
                            const double* y = g.value(self).raw();
                            double* dst = gi[0]->raw();
                            for (std::size_t i = 0; i < go.size(); ++i) dst[i] += go[i] * (1.0 - y[i] * y[i]);
                          });
}

Var selu(Var x) {
  Tensor out = map_values(x.value(), [](double v) {
    return v > 0.0 ? kSeluLambda * v : kSeluLambda * kSeluAlpha * std::expm1(v);
  });
  return x.graph().record("selu", std::move(out), {x.id()},
                          [](const Graph& g, std::size_t self, const Tensor& go, std::span<Tensor* const> gi) {
                            const double* in = g.value(g.input(self, 0)).raw();
                            double* dst = gi[0]->raw();
                            for (std::size_t i = 0; i < go.size(); ++i) {
                              const double d =
                                  in[i] > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(in[i]);
                              dst[i] += go[i] * d;
                            }
                          });
}

Var abs_op(Var x) {
  Tensor out = map_values(x.value(), [](double v) { return std::fabs(v); });
  return x.graph().record("abs", std::move(out), {x.id()},
                          [](const Graph& g, std::size_t self, const Tensor& go, std::span<Tensor* const> gi) {
                            const double* in = g.value(g.input(self, 0)).raw();
                            double* dst = gi[0]->raw();
                            for (std::size_t i = 0; i < go.size(); ++i) {
                              const double s = in[i] > 0.0 ? 1.0 : (in[i] < 0.0 ? -1.0 : 0.0);
                              dst[i] += go[i] * s;
                            }
                          });
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw ContractError("concat of an empty list");
  Graph& graph = parts.front().graph();
  const Shape& first = parts.front().shape();
  const std::size_t rank = first.size();
  if (rank > 2 || axis >= rank) {
    throw DimensionError("concat axis " + std::to_string(axis) + " invalid for shape " + shape_string(first));
  }
  std::size_t total = 0;
  for (const Var& p : parts) {
    same_graph(parts.front(), p, "concat");
    const Shape& s = p.shape();
    if (s.size() != rank) shape_mismatch("concat", first, s);
    for (std::size_t d = 0; d < rank; ++d) {
      if (d != axis && s[d] != first[d]) shape_mismatch("concat", first, s);
    }
    total += s[axis];
  }

  Shape out_shape = first;
  out_shape[axis] = total;
  Tensor out(out_shape);
  std::vector<std::size_t> inputs;
  std::vector<std::size_t> offsets;
  inputs.reserve(parts.size());
  offsets.reserve(parts.size());

  // Row-major: concatenation along axis 0 (or a vector) is a flat append;
  // along axis 1 each output row is the concatenation of the input rows.
  const bool flat = axis == 0;
  const std::size_t rows = flat ? 1 : first[0];
  const std::size_t out_cols = flat ? out.size() : total;
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    const std::size_t width = flat ? v.size() : v.cols();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(v.raw() + r * width, width, out.raw() + r * out_cols + offset);
    }
    inputs.push_back(p.id());
    offsets.push_back(offset);
    offset += width;
  }
  return graph.record("concat", std::move(out), std::move(inputs),
                      [offsets, rows, out_cols, flat](const Graph&, std::size_t, const Tensor& go,
                                                      std::span<Tensor* const> gi) {
                        for (std::size_t s = 0; s < gi.size(); ++s) {
                          if (!gi[s]) continue;
                          Tensor& dst = *gi[s];
                          const std::size_t width = flat ? dst.size() : dst.cols();
                          for (std::size_t r = 0; r < rows; ++r) {
                            kt().axpy(width, 1.0, go.raw() + r * out_cols + offsets[s], dst.raw() + r * width);
                          }
                        }
                      });
}

Var reduce_sum(Var x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return x.graph().record("reduce_sum", Tensor::scalar(s), {x.id()},
                          [](const Graph&, std::size_t, const Tensor& go, std::span<Tensor* const> gi) {
                            const double g = go[0];
                            for (double& v : gi[0]->data()) v += g;
                          });
}

Var reduce_sum(Var x, std::size_t axis) {
  const Shape& s = x.shape();
  if (axis >= s.size()) {
    throw DimensionError("reduce_sum axis " + std::to_string(axis) + " out of range for " + shape_string(s));
  }
  if (s.size() == 1) return reduce_sum(x);
  if (s.size() != 2) throw DimensionError("reduce_sum supports rank <= 2, got " + shape_string(s));
  const std::size_t m = s[0], n = s[1];
  const Tensor& xv = x.value();
  Tensor out(axis == 0 ? Shape{n} : Shape{m});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[axis == 0 ? j : i] += xv.at(i, j);
  }
  return x.graph().record("reduce_sum_axis", std::move(out), {x.id()},
                          [axis, m, n](const Graph&, std::size_t, const Tensor& go, std::span<Tensor* const> gi) {
                            Tensor& dst = *gi[0];
                            for (std::size_t i = 0; i < m; ++i)
                              for (std::size_t j = 0; j < n; ++j) dst.at(i, j) += go[axis == 0 ? j : i];
                          });
}

Var reduce_mean(Var x) { return scale(reduce_sum(x), 1.0 / static_cast<double>(x.value().size())); }

Var reduce_mean(Var x, std::size_t axis) {
  Var s = reduce_sum(x, axis);
  const std::size_t count = x.shape().size() == 1 ? x.shape()[0] : x.shape()[axis];
  return scale(s, 1.0 / static_cast<double>(count));
}

Var reshape(Var x, Shape shape) {
  Tensor out = x.value().reshaped(std::move(shape));
  return x.graph().record("reshape", std::move(out), {x.id()},
                          [](const Graph&, std::size_t, const Tensor& go, std::span<Tensor* const> gi) {
                            kt().axpy(go.size(), 1.0, go.raw(), gi[0]->raw());
                          });
}

Var gather_rows(Var x, std::span<const std::size_t> index) {
  const Shape& s = x.shape();
  if (s.size() != 2) throw DimensionError("gather_rows needs a matrix, got " + shape_string(s));
  if (index.empty()) throw ContractError("gather_rows with no indices");
  const std::size_t n = s[1];
  const Tensor& xv = x.value();
  Tensor out({index.size(), n});
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] >= s[0]) {
      throw DimensionError("gather_rows index " + std::to_string(index[r]) + " out of range for " + shape_string(s));
    }
    std::copy_n(xv.raw() + index[r] * n, n, out.raw() + r * n);
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  return x.graph().record("gather_rows", std::move(out), {x.id()},
                          [idx = std::move(idx), n](const Graph&, std::size_t, const Tensor& go,
                                                    std::span<Tensor* const> gi) {
                            for (std::size_t r = 0; r < idx.size(); ++r) {
                              kt().axpy(n, 1.0, go.raw() + r * n, gi[0]->raw() + idx[r] * n);
                            }
                          });
}

Var scatter_rows(Var base, std::span<const std::size_t> index, Var rows) {
  same_graph(base, rows, "scatter_rows");
  const Shape& sb = base.shape();
  const Shape& sr = rows.shape();
  if (sb.size() != 2 || sr.size() != 2 || sb[1] != sr[1] || sr[0] != index.size()) {
    shape_mismatch("scatter_rows", sb, sr);
  }
  const std::size_t n = sb[1];
  std::vector<char> replaced(sb[0], 0);
  Tensor out = base.value();
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] >= sb[0]) {
      throw DimensionError("scatter_rows index " + std::to_string(index[r]) + " out of range for " + shape_string(sb));
    }
    if (replaced[index[r]]) throw ContractError("scatter_rows indices must be distinct");
    replaced[index[r]] = 1;
    std::copy_n(rows.value().raw() + r * n, n, out.raw() + index[r] * n);
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  return base.graph().record("scatter_rows", std::move(out), {base.id(), rows.id()},
                             [idx = std::move(idx), replaced = std::move(replaced), n](
                                 const Graph&, std::size_t, const Tensor& go, std::span<Tensor* const> gi) {
                               if (gi[0]) {
                                 for (std::size_t r = 0; r < replaced.size(); ++r) {
                                   if (!replaced[r]) kt().axpy(n, 1.0, go.raw() + r * n, gi[0]->raw() + r * n);
                                 }
                               }
                               if (gi[1]) {
                                 for (std::size_t r = 0; r < idx.size(); ++r) {
                                   kt().axpy(n, 1.0, go.raw() + idx[r] * n, gi[1]->raw() + r * n);
                                 }
                               }
                             });
}

Var segment_sum(Var x, std::span<const std::size_t> segment, std::size_t count) {
  const Shape& s = x.shape();
  if (s.size() != 2) throw DimensionError("segment_sum needs a matrix, got " + shape_string(s));
  if (segment.size() != s[0]) {
    throw DimensionError("segment_sum: " + std::to_string(segment.size()) + " segment ids for " +
                         shape_string(s));
  }
  if (count == 0) throw ContractError("segment_sum with zero segments");
  const std::size_t n = s[1];
  std::vector<std::vector<std::size_t>> members(count);
  for (std::size_t r = 0; r < segment.size(); ++r) {
    if (segment[r] >= count) {
      throw DimensionError("segment id " + std::to_string(segment[r]) + " out of range " + std::to_string(count));
    }
    members[segment[r]].push_back(r);
  }
  const Tensor& xv = x.value();
  Tensor out({count, n});
  std::vector<double> buffer;
  for (std::size_t seg = 0; seg < count; ++seg) {
    const auto& rows = members[seg];
    if (rows.empty()) continue;
    buffer.resize(rows.size());
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t q = 0; q < rows.size(); ++q) buffer[q] = xv.at(rows[q], j);
      out.at(seg, j) = sorted_sum(buffer);
    }
  }
  std::vector<std::size_t> seg_ids(segment.begin(), segment.end());
  return x.graph().record("segment_sum", std::move(out), {x.id()},
                          [seg_ids = std::move(seg_ids), n](const Graph&, std::size_t, const Tensor& go,
                                                            std::span<Tensor* const> gi) {
                            for (std::size_t r = 0; r < seg_ids.size(); ++r) {
                              kt().axpy(n, 1.0, go.raw() + seg_ids[r] * n, gi[0]->raw() + r * n);
                            }
                          });
}

}  // namespace aesmpn::numerics
