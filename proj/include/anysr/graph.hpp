// graph.hpp : tape-based reverse-mode autodiff over the tensor kernels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "anysr/tensor.hpp"

namespace anysr {

// A single-use tape: ops append nodes eagerly, backward() walks the tape in
// reverse creation order accumulating tensor gradients and folding parameter
// gradients into Parameter::grad. Rebuilt every training step.
template <typename T>
class Graph {
 public:
  using Id = std::size_t;

  Id input(Tensor4<T> v) { return push(Node{std::move(v), {}, {}}); }

  Id conv2d(Id x, Parameter<T>& w, Parameter<T>& b, bool same_pad) {
    Node node{nn::conv2d_forward(value(x), w.value, b.value, same_pad), {x}, {}};
    Parameter<T>* wp = &w;
    Parameter<T>* bp = &b;
    node.backward = [this, x, wp, bp, same_pad](const Tensor4<T>& gy) {
      Tensor4<T> gx;
      nn::conv2d_backward(value(x), wp->value, gy, same_pad, &gx, &wp->grad, &bp->grad);
      accumulate(x, gx);
    };
    return push(std::move(node));
  }

  Id relu(Id x) {
    Node node{nn::relu_forward(value(x)), {x}, {}};
    node.backward = [this, x](const Tensor4<T>& gy) {
      accumulate(x, nn::relu_backward(value(x), gy));
    };
    return push(std::move(node));
  }

  Id sigmoid(Id x) {
    Node node{nn::sigmoid_forward(value(x)), {x}, {}};
    const Id self = nodes_.size();
    node.backward = [this, x, self](const Tensor4<T>& gy) {
      accumulate(x, nn::sigmoid_backward(value(self), gy));
    };
    return push(std::move(node));
  }

  Id add(Id a, Id b) {
    Node node{nn::add(value(a), value(b)), {a, b}, {}};
    node.backward = [this, a, b](const Tensor4<T>& gy) {
      accumulate(a, gy);
      accumulate(b, gy);
    };
    return push(std::move(node));
  }

  // Elementwise / broadcast product (see nn::mul for the accepted shapes).
  Id mul(Id x, Id gate) {
    Node node{nn::mul(value(x), value(gate)), {x, gate}, {}};
    node.backward = [this, x, gate](const Tensor4<T>& gy) {
      Tensor4<T> gx, gg;
      nn::mul_backward(value(x), value(gate), gy, &gx, &gg);
      accumulate(x, gx);
      accumulate(gate, gg);
    };
    return push(std::move(node));
  }

  Id concat(std::vector<Id> xs) {
    std::vector<const Tensor4<T>*> views;
    std::vector<int> sizes;
    views.reserve(xs.size());
    for (Id id : xs) {
      views.push_back(&value(id));
      sizes.push_back(value(id).c);
    }
    Node node{nn::concat_channels(views), xs, {}};
    node.backward = [this, xs, sizes](const Tensor4<T>& gy) {
      std::vector<Tensor4<T>> parts = nn::split_channels(gy, sizes);
      for (std::size_t i = 0; i < xs.size(); ++i) accumulate(xs[i], parts[i]);
    };
    return push(std::move(node));
  }

  Id global_avg_pool(Id x) {
    Node node{nn::global_avg_pool(value(x)), {x}, {}};
    node.backward = [this, x](const Tensor4<T>& gy) {
      accumulate(x, nn::global_avg_pool_backward(value(x), gy));
    };
    return push(std::move(node));
  }

  // Escape hatch for tests that need a node with a nonstandard backward.
  Id custom_unary(Id x, std::function<Tensor4<T>(const Tensor4<T>&)> fwd,
                  std::function<Tensor4<T>(const Tensor4<T>&, const Tensor4<T>&)> bwd) {
    Node node{fwd(value(x)), {x}, {}};
    node.backward = [this, x, bwd](const Tensor4<T>& gy) {
      accumulate(x, bwd(value(x), gy));
    };
    return push(std::move(node));
  }

  const Tensor4<T>& value(Id id) const { return nodes_[id].value; }

  // Seeds d(root) and propagates to every reachable node and parameter.
  void backward(Id root, const Tensor4<T>& seed) {
    grads_.assign(nodes_.size(), Tensor4<T>());
    if (!seed.same_shape(nodes_[root].value))
      throw InvalidArgument("Graph::backward: seed shape mismatch");
    grads_[root] = seed;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      if (grads_[i].data.empty() || !nodes_[i].backward) continue;
      nodes_[i].backward(grads_[i]);
    }
  }

  const Tensor4<T>& grad(Id id) const { return grads_[id]; }

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor4<T> value;
    std::vector<Id> inputs;
    std::function<void(const Tensor4<T>&)> backward;
  };

  Id push(Node n) {
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  void accumulate(Id id, const Tensor4<T>& g) {
    if (grads_[id].data.empty())
      grads_[id] = g;
    else
      grads_[id] = nn::add(grads_[id], g);
  }

  std::vector<Node> nodes_;
  std::vector<Tensor4<T>> grads_;
};

}  // namespace anysr
