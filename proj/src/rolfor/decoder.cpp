// Copyright 2026 The RolFor Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rolfor/decoder.hpp"

#include <cmath>
#include <string>

#include "rolfor/errors.hpp"

namespace rolfor {

namespace {

// out[o, r, t] = b[o] + sum_c sum_j w[o, c, j] * in[c, r, t + j - pad]
Tensor conv_time(const Tensor& in, const Tensor& w, const Tensor& b) {
  const std::size_t cout = w.dim(0), cin = w.dim(1), ks = w.dim(2);
  const std::size_t roles = in.dim(1), frames = in.dim(2);
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(ks / 2);
  const std::ptrdiff_t tf = static_cast<std::ptrdiff_t>(frames);
  Tensor out(Shape{cout, roles, frames});
  for (std::size_t o = 0; o < cout; ++o) {
    double* oo = &out[o * roles * frames];
    for (std::size_t i = 0; i < roles * frames; ++i) oo[i] = b[o];
    for (std::size_t c = 0; c < cin; ++c) {
      const double* ic = &in[c * roles * frames];
      for (std::size_t j = 0; j < ks; ++j) {
        const double wv = w[(o * cin + c) * ks + j];
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - pad;
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(tf, tf - shift);
        for (std::size_t r = 0; r < roles; ++r)
          for (std::ptrdiff_t t = lo; t < hi; ++t) oo[r * frames + t] += wv * ic[r * frames + t + shift];
      }
    }
  }
  return out;
}

Tensor conv_time_backward(const Tensor& in, const Tensor& w, const Tensor& d_out, Tensor& gw, Tensor& gb) {
  const std::size_t cout = w.dim(0), cin = w.dim(1), ks = w.dim(2);
  const std::size_t roles = in.dim(1), frames = in.dim(2);
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(ks / 2);
  const std::ptrdiff_t tf = static_cast<std::ptrdiff_t>(frames);
  Tensor d_in(in.shape());
  for (std::size_t o = 0; o < cout; ++o) {
    const double* dz = &d_out[o * roles * frames];
    double sb = 0.0;
    for (std::size_t i = 0; i < roles * frames; ++i) sb += dz[i];
    gb[o] += sb;
    for (std::size_t c = 0; c < cin; ++c) {
      const double* ic = &in[c * roles * frames];
      double* dic = &d_in[c * roles * frames];
      for (std::size_t j = 0; j < ks; ++j) {
        const double wv = w[(o * cin + c) * ks + j];
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - pad;
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(tf, tf - shift);
        double sw = 0.0;
        for (std::size_t r = 0; r < roles; ++r)
          for (std::ptrdiff_t t = lo; t < hi; ++t) {
            sw += dz[r * frames + t] * ic[r * frames + t + shift];
            dic[r * frames + t + shift] += wv * dz[r * frames + t];
          }
        gw[(o * cin + c) * ks + j] += sw;
      }
    }
  }
  return d_in;
}

void init_uniform(Tensor& t, Rng& rng, double bound) {
  for (double& v : t.data()) v = rng.uniform(-bound, bound);
}

}  // namespace

TcnDecoder TcnDecoder::initialized(std::size_t c_enc, std::size_t hidden, std::size_t kernel, std::size_t t_obs,
                                   std::size_t k_fut, Rng& rng) {
  if (kernel % 2 == 0) fail(ErrorKind::kConfig, "decoder kernel size must be odd, got " + std::to_string(kernel));
  TcnDecoder dec;
  dec.conv0_w = Tensor(Shape{hidden, c_enc, kernel});
  dec.conv0_b = Tensor(Shape{hidden});
  dec.conv1_w = Tensor(Shape{2, hidden, kernel});
  dec.conv1_b = Tensor(Shape{2});
  dec.proj = Tensor(Shape{k_fut, t_obs});
  init_uniform(dec.conv0_w, rng, 1.0 / std::sqrt(static_cast<double>(c_enc * kernel)));
  init_uniform(dec.conv1_w, rng, 1.0 / std::sqrt(static_cast<double>(hidden * kernel)));
  // Every future frame starts as a copy of the last observed one.
  for (std::size_t k = 0; k < k_fut; ++k) dec.proj(k, t_obs - 1) = 1.0;
  return dec;
}

TcnDecoder TcnDecoder::zeros_like(const TcnDecoder& other) {
  TcnDecoder z;
  z.conv0_w = Tensor(other.conv0_w.shape());
  z.conv0_b = Tensor(other.conv0_b.shape());
  z.conv1_w = Tensor(other.conv1_w.shape());
  z.conv1_b = Tensor(other.conv1_b.shape());
  z.proj = Tensor(other.proj.shape());
  return z;
}

Tensor decode(const TcnDecoder& dec, const Tensor& h, DecoderCache* cache) {
  if (h.rank() != 3 || h.dim(0) != dec.in_channels() || h.dim(2) != dec.frames_in()) {
    fail(ErrorKind::kDimension, "decode: input " + h.shape_string() + " does not match decoder with " +
                                    std::to_string(dec.in_channels()) + " channels and " +
                                    std::to_string(dec.frames_in()) + " frames");
  }
  Tensor hidden = conv_time(h, dec.conv0_w, dec.conv0_b);
  for (double& v : hidden.data()) v = std::tanh(v);
  Tensor conv = conv_time(hidden, dec.conv1_w, dec.conv1_b);

  const std::size_t roles = h.dim(1), frames = h.dim(2), k_fut = dec.frames_out();
  Tensor out(Shape{k_fut, roles, 2});
  for (std::size_t k = 0; k < k_fut; ++k)
    for (std::size_t r = 0; r < roles; ++r)
      for (std::size_t d = 0; d < 2; ++d) {
        double s = 0.0;
        for (std::size_t t = 0; t < frames; ++t) s += dec.proj(k, t) * conv[(d * roles + r) * frames + t];
        out(k, r, d) = s;
      }
  if (cache) {
    cache->input = h;
    cache->hidden = std::move(hidden);
    cache->conv = std::move(conv);
  }
  return out;
}

Tensor decode_backward(const TcnDecoder& dec, const DecoderCache& cache, const Tensor& d_out, TcnDecoder& grad) {
  const std::size_t roles = cache.input.dim(1), frames = cache.input.dim(2), k_fut = dec.frames_out();
  require_shape(d_out, Shape{k_fut, roles, 2}, "decode_backward");
  Tensor d_conv(cache.conv.shape());
  for (std::size_t k = 0; k < k_fut; ++k)
    for (std::size_t r = 0; r < roles; ++r)
      for (std::size_t d = 0; d < 2; ++d) {
        const double g = d_out(k, r, d);
        for (std::size_t t = 0; t < frames; ++t) {
          grad.proj(k, t) += g * cache.conv[(d * roles + r) * frames + t];
          d_conv[(d * roles + r) * frames + t] += g * dec.proj(k, t);
        }
      }
  Tensor d_hidden = conv_time_backward(cache.hidden, dec.conv1_w, d_conv, grad.conv1_w, grad.conv1_b);
  for (std::size_t i = 0; i < d_hidden.size(); ++i) d_hidden[i] *= 1.0 - cache.hidden[i] * cache.hidden[i];
  return conv_time_backward(cache.input, dec.conv0_w, d_hidden, grad.conv0_w, grad.conv0_b);
}

}  // namespace rolfor
