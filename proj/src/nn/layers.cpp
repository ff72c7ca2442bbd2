// SPDX-License-Identifier: Apache-2.0
#include "aesmpn/nn/layers.hpp"

#include "aesmpn/numerics/error.hpp"
#include "aesmpn/numerics/ops.hpp"

namespace aesmpn::nn {

using namespace aesmpn::numerics;

namespace {

void expect_width(const char* what, const Var& x, std::size_t width) {
  if (x.shape().empty() || x.shape().size() > 2 || x.shape().back() != width) {
    throw DimensionError(std::string(what) + ": expected trailing extent " + std::to_string(width) + ", got " +
                         shape_string(x.shape()));
  }
}

}  // namespace

LinearLayer LinearLayer::create(ParamBuilder& builder, const std::string& prefix, std::size_t in, std::size_t out) {
  LinearLayer layer;
  layer.weight = builder.weight(prefix + ".W", out, in);
  layer.bias = builder.bias(prefix + ".b", out);
  layer.in = in;
  layer.out = out;
  return layer;
}

Var LinearLayer::forward(Graph& g, Var x) const {
  expect_width("linear", x, in);
  const bool single = x.shape().size() == 1;
  Var rows = single ? reshape(x, {1, in}) : x;
  Var y = add(matmul_nt(rows, g.param(weight)), g.param(bias));
  return single ? reshape(y, {out}) : y;
}

AutoEncoder AutoEncoder::create(ParamBuilder& builder, const std::string& prefix, std::size_t in,
                                std::size_t latent) {
  return AutoEncoder{LinearLayer::create(builder, prefix + ".encoder", in, latent),
                     LinearLayer::create(builder, prefix + ".decoder", latent, in)};
}

Var ae_encode(Graph& g, const AutoEncoder& ae, Var x) { return ae.encoder.forward(g, x); }

Var ae_decode(Graph& g, const AutoEncoder& ae, Var z) { return ae.decoder.forward(g, z); }

Var ae_loss(Graph& g, const AutoEncoder& ae, std::span<const Tensor> batch) {
  if (batch.empty()) throw ContractError("ae_loss on an empty batch");
  const std::size_t in = ae.input_width();
  std::vector<double> flat;
  flat.reserve(batch.size() * in);
  for (const Tensor& x : batch) {
    if (x.size() != in) {
      throw DimensionError("ae_loss: sample of shape " + shape_string(x.shape()) + " for input width " +
                           std::to_string(in));
    }
    flat.insert(flat.end(), x.data().begin(), x.data().end());
  }
  Var x = g.constant(Tensor::matrix(batch.size(), in, std::move(flat)));
  Var diff = sub(x, ae_decode(g, ae, ae_encode(g, ae, x)));
  return reduce_sum(mul(diff, diff));
}

LstmCell LstmCell::create(ParamBuilder& builder, const std::string& prefix, std::size_t input, std::size_t hidden) {
  const std::size_t width = hidden + input;
  LstmCell cell;
  cell.w_forget = builder.weight(prefix + ".W_f", hidden, width);
  cell.b_forget = builder.bias(prefix + ".b_f", hidden);
  cell.w_input = builder.weight(prefix + ".W_i", hidden, width);
  cell.b_input = builder.bias(prefix + ".b_i", hidden);
  cell.w_candidate = builder.weight(prefix + ".W_C", hidden, width);
  cell.b_candidate = builder.bias(prefix + ".b_C", hidden);
  cell.w_output = builder.weight(prefix + ".W_o", hidden, width);
  cell.b_output = builder.bias(prefix + ".b_o", hidden);
  cell.hidden = hidden;
  cell.input = input;
  return cell;
}

LstmState lstm_step(Graph& g, const LstmCell& cell, Var h_prev, Var c_prev, Var x) {
  expect_width("lstm_step h_prev", h_prev, cell.hidden);
  expect_width("lstm_step c_prev", c_prev, cell.hidden);
  expect_width("lstm_step x", x, cell.input);
  if (h_prev.shape() != c_prev.shape() || h_prev.shape().size() != x.shape().size() ||
      (x.shape().size() == 2 && h_prev.shape().front() != x.shape().front())) {
    throw DimensionError("lstm_step: inconsistent batch shapes " + shape_string(h_prev.shape()) + ", " +
                         shape_string(c_prev.shape()) + ", " + shape_string(x.shape()));
  }
  g.note("lstm_step");
  const std::size_t axis = x.shape().size() - 1;
  Var hx = concat({h_prev, x}, axis);
  const bool single = axis == 0;
  Var rows = single ? reshape(hx, {1, cell.hidden + cell.input}) : hx;

  auto gate = [&](ParamId w, ParamId b) {
    Var z = add(matmul_nt(rows, g.param(w)), g.param(b));
    return single ? reshape(z, {cell.hidden}) : z;
  };
  Var f = sigmoid(gate(cell.w_forget, cell.b_forget));
  Var i = sigmoid(gate(cell.w_input, cell.b_input));
  Var candidate = tanh_op(gate(cell.w_candidate, cell.b_candidate));
  Var c = add(mul(f, c_prev), mul(i, candidate));
  Var o = sigmoid(gate(cell.w_output, cell.b_output));
  Var h = mul(o, tanh_op(c));
  return {h, c};
}

SkipMlp SkipMlp::create(ParamBuilder& builder, const std::string& prefix, std::size_t width, std::size_t depth) {
  SkipMlp block;
  block.width = width;
  for (std::size_t l = 0; l < depth; ++l) {
    block.hidden.push_back(LinearLayer::create(builder, prefix + ".hidden" + std::to_string(l), width, width));
  }
  block.head = LinearLayer::create(builder, prefix + ".head", width, 1);
  return block;
}

Var skip_forward(Graph& g, const SkipMlp& block, Var x, std::vector<Var>* trace) {
  expect_width("skip_forward", x, block.width);
  Var u = x;
  for (const LinearLayer& layer : block.hidden) {
    u = add(selu(layer.forward(g, u)), u);
    if (trace) trace->push_back(u);
  }
  return block.head.forward(g, u);
}

}  // namespace aesmpn::nn
