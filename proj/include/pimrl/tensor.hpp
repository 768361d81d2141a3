#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pimrl/errors.hpp"

namespace pimrl {

// Leading extent is the channel count; the rest are spatial extents.
// Kernels are [out_ch, in_ch, k...] and scalars are shape {1}.
using Shape = std::vector<int>;

long numel(const Shape& s);
std::string shape_str(const Shape& s);

class Graph;

// Lightweight handle into a Graph node.
struct Tensor {
  Graph* graph = nullptr;
  int id = -1;

  bool valid() const { return graph != nullptr && id >= 0; }
  const Shape& shape() const;
  const std::vector<double>& values() const;
  const std::vector<double>& grad() const;
  bool requires_grad() const;
};

struct Node {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // same shape as values on recording graphs
  bool requires_grad = false;
  std::vector<int> parents;
  std::function<void(Graph&)> backward_fn;  // accumulates into parent grads

  bool is_leaf() const { return !backward_fn; }
};

enum class Padding { periodic, none };

struct ConvOpts {
  Padding padding = Padding::periodic;
  int stride = 1;  // 1 or 2
};

// Define-by-run reverse-mode graph. Node ids increase in creation order
// and the graph is rebuilt per forward pass; node values are never
// mutated in place. One writer at a time; handles are value types.
class Graph {
 public:
  // recording=false skips grad buffers and parent bookkeeping; use it for
  // inference-only passes.
  explicit Graph(bool recording = true) : recording_(recording) {}

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Tensor leaf(Shape shape, std::vector<double> values, bool requires_grad = false);
  Tensor constant(Shape shape, std::vector<double> values) {
    return leaf(std::move(shape), std::move(values), false);
  }

  int size() const { return static_cast<int>(nodes_.size()); }
  Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  bool recording() const { return recording_; }

  // Reverse sweep from a scalar root. Leaf grads accumulate across calls
  // (zero_grad() for a fresh pass); interior grads reflect the last call.
  void backward(Tensor root);
  void zero_grad();

  // Used by the op builders.
  Tensor emplace(Shape shape, std::vector<double> values, bool requires_grad,
                 std::vector<int> parents, std::function<void(Graph&)> backward_fn);

 private:
  std::vector<Node> nodes_;
  bool recording_;
};

// ---- op set ----
Tensor add(Tensor a, Tensor b);
Tensor sub(Tensor a, Tensor b);
Tensor elementwise_mul(Tensor a, Tensor b);
Tensor scalar_mul(Tensor a, double factor);
Tensor tanh(Tensor a);
Tensor sigmoid(Tensor a);
Tensor sum(Tensor a);
Tensor mean(Tensor a);
Tensor mse(Tensor a, Tensor b);

// Cross-correlation (no kernel flip), dilation 1. Periodic padding keeps
// the spatial extent (divided by stride); "none" is a valid conv.
Tensor conv(Tensor x, Tensor kernel, std::optional<Tensor> bias = std::nullopt,
            ConvOpts opts = {});

// Channel mixing: weight is [out_ch, in_ch].
Tensor conv_1x1(Tensor x, Tensor weight);

// Nearest-neighbour x2 upsampling of every spatial dim.
Tensor upsample2_nearest(Tensor x);

// String-keyed dispatcher for generic callers (bindings, contract tests).
struct OpAttrs {
  double scalar = 0.0;
  Padding padding = Padding::periodic;
  int stride = 1;
};
Tensor forward_op(const std::string& op_kind, const std::vector<Tensor>& inputs,
                  const OpAttrs& attrs = {});

}  // namespace pimrl
