#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace gainsched {

// Dense layer, weights row-major [out x in], tanh on hidden layers only.
struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> w; // out*in
  std::vector<double> b; // out
};

struct Mlp {
  std::vector<Layer> layers;

  int input_size() const { return layers.front().in; }
  int output_size() const { return layers.back().out; }

  bool shape_matches(const Mlp& other) const {
    if (layers.size() != other.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i)
      if (layers[i].in != other.layers[i].in || layers[i].out != other.layers[i].out)
        return false;
    return true;
  }

  static Mlp zeros_like(const Mlp& ref) {
    Mlp g = ref;
    for (auto& l : g.layers) {
      std::fill(l.w.begin(), l.w.end(), 0.0);
      std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    return g;
  }

  void fill(double v) {
    for (auto& l : layers) {
      std::fill(l.w.begin(), l.w.end(), v);
      std::fill(l.b.begin(), l.b.end(), v);
    }
  }
};

namespace detail {

// Orthogonalize the rows (or columns, whichever is fewer) of a Gaussian
// matrix via modified Gram-Schmidt, then scale by `gain`.
inline std::vector<double> orthogonal_matrix(int rows, int cols, double gain,
                                             std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  const bool transpose = rows < cols;
  const int r = transpose ? cols : rows;
  const int c = transpose ? rows : cols;

  std::vector<std::vector<double>> q(c, std::vector<double>(r));
  for (auto& col : q)
    for (auto& v : col) v = nd(rng);
  for (int j = 0; j < c; ++j) {
    for (int k = 0; k < j; ++k) {
      double dot = 0.0;
      for (int i = 0; i < r; ++i) dot += q[j][i] * q[k][i];
      for (int i = 0; i < r; ++i) q[j][i] -= dot * q[k][i];
    }
    double norm = 0.0;
    for (int i = 0; i < r; ++i) norm += q[j][i] * q[j][i];
    norm = std::sqrt(norm);
    if (norm < 1e-12) norm = 1.0;
    for (int i = 0; i < r; ++i) q[j][i] /= norm;
  }

  std::vector<double> w(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      w[static_cast<std::size_t>(i) * cols + j] =
          gain * (transpose ? q[i][j] : q[j][i]);
  return w;
}

} // namespace detail

// Orthogonal init, gain sqrt(2) on hidden layers and `out_gain` on the
// output layer; zero biases.
inline Mlp make_mlp(const std::vector<int>& sizes, double out_gain,
                    std::mt19937_64& rng) {
  if (sizes.size() < 2) throw std::invalid_argument("make_mlp: need at least 2 sizes");
  Mlp net;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    Layer l;
    l.in = sizes[i];
    l.out = sizes[i + 1];
    const bool last = i + 2 == sizes.size();
    l.w = detail::orthogonal_matrix(l.out, l.in, last ? out_gain : std::sqrt(2.0), rng);
    l.b.assign(l.out, 0.0);
    net.layers.push_back(std::move(l));
  }
  return net;
}

// Per-layer activations cached for the backward pass. post[0] is the input.
struct Activations {
  std::vector<std::vector<double>> pre;  // affine outputs, one per layer
  std::vector<std::vector<double>> post; // post[0]=input, post[i]=layer i-1 output
};

inline std::vector<double> forward_cached(const Mlp& net, std::span<const double> input,
                                          Activations& acts) {
  if (static_cast<int>(input.size()) != net.input_size())
    throw std::invalid_argument("forward: input dimension mismatch");
  acts.pre.assign(net.layers.size(), {});
  acts.post.assign(net.layers.size() + 1, {});
  acts.post[0].assign(input.begin(), input.end());

  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const Layer& l = net.layers[li];
    const auto& x = acts.post[li];
    auto& z = acts.pre[li];
    z.assign(l.out, 0.0);
    for (int o = 0; o < l.out; ++o) {
      double acc = l.b[o];
      const double* wr = &l.w[static_cast<std::size_t>(o) * l.in];
      for (int i = 0; i < l.in; ++i) acc += wr[i] * x[i];
      z[o] = acc;
    }
    const bool last = li + 1 == net.layers.size();
    auto& y = acts.post[li + 1];
    y.resize(l.out);
    for (int o = 0; o < l.out; ++o) y[o] = last ? z[o] : std::tanh(z[o]);
  }
  return acts.post.back();
}

inline std::vector<double> forward(const Mlp& net, std::span<const double> input) {
  Activations acts;
  return forward_cached(net, input, acts);
}

// Reverse-mode gradients for the cached forward pass. Accumulates into
// `grads` (+=) so minibatch gradients sum naturally. Returns d loss / d input.
inline std::vector<double> backward(const Mlp& net, const Activations& acts,
                                    std::span<const double> output_grad, Mlp& grads) {
  if (!net.shape_matches(grads))
    throw std::invalid_argument("backward: gradient shape mismatch");
  if (static_cast<int>(output_grad.size()) != net.output_size())
    throw std::invalid_argument("backward: output_grad dimension mismatch");

  std::vector<double> delta(output_grad.begin(), output_grad.end());
  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const Layer& l = net.layers[li];
    Layer& gl = grads.layers[li];
    const bool last = li + 1 == net.layers.size();
    if (!last) {
      // d tanh(z) = 1 - tanh(z)^2; acts.post[li+1] holds tanh(z)
      const auto& y = acts.post[li + 1];
      for (int o = 0; o < l.out; ++o) delta[o] *= 1.0 - y[o] * y[o];
    }
    const auto& x = acts.post[li];
    for (int o = 0; o < l.out; ++o) {
      gl.b[o] += delta[o];
      double* gw = &gl.w[static_cast<std::size_t>(o) * l.in];
      for (int i = 0; i < l.in; ++i) gw[i] += delta[o] * x[i];
    }
    std::vector<double> prev(l.in, 0.0);
    for (int o = 0; o < l.out; ++o) {
      const double* wr = &l.w[static_cast<std::size_t>(o) * l.in];
      for (int i = 0; i < l.in; ++i) prev[i] += wr[i] * delta[o];
    }
    delta = std::move(prev);
  }
  return delta;
}

} // namespace gainsched
