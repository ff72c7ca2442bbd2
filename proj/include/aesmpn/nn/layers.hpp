// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aesmpn/nn/init.hpp"
#include "aesmpn/numerics/graph.hpp"

// Layers hold parameter ids into a ParamStore; forwards take inputs either as
// a single vector [in] or as a batch of row vectors [n x in].

namespace aesmpn::nn {

using numerics::Graph;
using numerics::Var;

/// y = W x + b with W [out x in], b [out].
struct LinearLayer {
  ParamId weight = 0;
  ParamId bias = 0;
  std::size_t in = 0;
  std::size_t out = 0;

  static LinearLayer create(ParamBuilder& builder, const std::string& prefix, std::size_t in, std::size_t out);
  Var forward(Graph& g, Var x) const;
};

/// Linear encoder/decoder pair. Both halves are affine with no activation.
struct AutoEncoder {
  LinearLayer encoder;  // latent x in
  LinearLayer decoder;  // in x latent

  static AutoEncoder create(ParamBuilder& builder, const std::string& prefix, std::size_t in, std::size_t latent);
  std::size_t input_width() const { return encoder.in; }
  std::size_t latent_width() const { return encoder.out; }
};

Var ae_encode(Graph& g, const AutoEncoder& ae, Var x);
Var ae_decode(Graph& g, const AutoEncoder& ae, Var z);
/// Sum over the batch of ||x - decode(encode(x))||^2.
Var ae_loss(Graph& g, const AutoEncoder& ae, std::span<const numerics::Tensor> batch);

/// Gate weights act on the concatenation [h_prev, x].
struct LstmCell {
  ParamId w_forget = 0, b_forget = 0;
  ParamId w_input = 0, b_input = 0;
  ParamId w_candidate = 0, b_candidate = 0;
  ParamId w_output = 0, b_output = 0;
  std::size_t hidden = 0;
  std::size_t input = 0;

  static LstmCell create(ParamBuilder& builder, const std::string& prefix, std::size_t input, std::size_t hidden);
};

struct LstmState {
  Var h;
  Var c;
};

/// f = s(Wf[h,x]+bf), i = s(Wi[h,x]+bi), C~ = tanh(Wc[h,x]+bc),
/// c = f*c_prev + i*C~, o = s(Wo[h,x]+bo), h = o*tanh(c).
LstmState lstm_step(Graph& g, const LstmCell& cell, Var h_prev, Var c_prev, Var x);

/// Readout: square residual blocks u <- SELU(W u + b) + u, then a linear head
/// to one output without a residual.
struct SkipMlp {
  std::vector<LinearLayer> hidden;
  LinearLayer head;
  std::size_t width = 0;

  static SkipMlp create(ParamBuilder& builder, const std::string& prefix, std::size_t width, std::size_t depth);
};

/// Returns [1] for a vector input, [n x 1] for a batch. When trace is given,
/// it receives the representation after every residual block.
Var skip_forward(Graph& g, const SkipMlp& block, Var x, std::vector<Var>* trace = nullptr);

}  // namespace aesmpn::nn
