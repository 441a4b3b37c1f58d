#pragma once

#include <Eigen/Dense>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace isac::ad {

/// Number of elements described by a shape; the empty shape is a scalar.
int shape_size(std::span<const int> shape);
std::string shape_str(std::span<const int> shape);
inline std::string shape_str(std::initializer_list<int> shape) {
  return shape_str(std::span<const int>(shape.begin(), shape.size()));
}

/// Dense real array of arbitrary rank, stored flat in row-major order.
struct Tensor {
  std::vector<int> shape;
  Eigen::ArrayXd data;

  Tensor() = default;
  Tensor(std::vector<int> s, Eigen::ArrayXd d);

  static Tensor zeros(std::vector<int> s);
  static Tensor full(std::vector<int> s, double v);
  static Tensor scalar(double v);
  static Tensor of(std::vector<int> s, std::initializer_list<double> v);

  int size() const { return static_cast<int>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  double& operator[](int i) { return data[i]; }
  double operator[](int i) const { return data[i]; }
  /// Value of a single-element tensor.
  double item() const;
};

class Graph;

/// Lightweight handle to a node owned by a Graph.
struct Value {
  int id = -1;
  Graph* g = nullptr;
  bool ok() const { return id >= 0 && g != nullptr; }
  const Tensor& val() const;
  const Tensor& grad() const;
};

enum class Pad { same, valid };

/// Reverse-mode tape. Forward values are computed eagerly at node creation;
/// backward() runs one reverse sweep in creation order, which is a valid
/// reverse topological order. Construction order, sweeps and accumulations
/// are all sequential, so adjoints are bit-stable run to run.
class Graph {
 public:
  /// Input data; gradients never flow into it.
  Value constant(Tensor v);
  /// Differentiation target (network parameter or probed input).
  Value leaf(Tensor v);

  /// Fills adjoints of every node the scalar root depends on.
  /// Throws std::invalid_argument when root is not a single element.
  void backward(Value root);

  const Tensor& value(Value v) const;
  /// Adjoint after backward(); zeros when the node was never reached.
  const Tensor& grad(Value v);
  std::size_t node_count() const { return nodes_.size(); }

 private:
  friend struct Value;
  friend class OpBuilder;

  struct Node {
    Tensor value;
    Tensor adjoint;  ///< empty until first touched by backward
    std::vector<int> parents;
    std::function<void(Graph&, int)> back;  ///< empty for constants/leaves
    bool needs_grad = false;
    const char* tag = "";
  };
  std::vector<Node> nodes_;

  int add_node(Tensor val, std::vector<int> parents,
               std::function<void(Graph&, int)> back, const char* tag,
               bool force_grad = false);
  /// Adjoint storage of a node, allocated on first use; nullptr when the
  /// node does not require gradients.
  Tensor* adj(int id);
  const Tensor& node_value(int id) const { return nodes_[id].value; }

  // Primitive constructors; the public surface is the free functions below.
  friend Value add(Value, Value);
  friend Value sub(Value, Value);
  friend Value mul(Value, Value);
  friend Value divide(Value, Value);
  friend Value add_scalar(Value, double);
  friend Value scale(Value, double);
  friend Value neg(Value);
  friend Value matmul(Value, Value);
  friend Value sum(Value);
  friend Value mean(Value);
  friend Value log2(Value);
  friend Value square(Value);
  friend Value ramp(Value);
  friend Value sigmoid(Value);
  friend Value tanh(Value);
  friend Value reshape(Value, std::vector<int>);
  friend Value concat(std::span<const Value>, int);
  friend Value slice(Value, int, int, int);
  friend Value clamp_max(Value, double);
  friend Value conv2d(Value, Value, Value, Pad, int, int);
  friend Value maxpool2d(Value, int, int, int, int);
};

Value add(Value a, Value b);
Value sub(Value a, Value b);
Value mul(Value a, Value b);
/// Elementwise quotient. The backward rule skips coordinates whose incoming
/// adjoint is exactly zero, so saturated downstream operations cannot inject
/// inf*0 artifacts.
Value divide(Value a, Value b);
Value add_scalar(Value a, double c);
Value scale(Value a, double c);
Value neg(Value a);
/// [m,n] x [n,p] -> [m,p]; also [m,n] x [n] -> [m].
Value matmul(Value a, Value b);
Value sum(Value a);
Value mean(Value a);
Value log2(Value a);
Value square(Value a);
/// max(0, x); the subgradient at 0 is taken as 0.
Value ramp(Value a);
inline Value relu(Value a) { return ramp(a); }
Value sigmoid(Value a);
Value tanh(Value a);
Value reshape(Value a, std::vector<int> shape);
Value concat(std::span<const Value> parts, int axis);
Value slice(Value a, int axis, int start, int len);
/// min(x, cap); the subgradient where x >= cap is 0.
Value clamp_max(Value a, double cap);
/// sum(a * b) of same-shape tensors.
Value dot(Value a, Value b);

/// Cross-correlation of input [H,W,C] with kernels [F,kh,kw,C] plus bias [F].
/// 'same' pads so H' = ceil(H/stride); 'valid' uses only full windows.
Value conv2d(Value input, Value kernels, Value bias, Pad pad,
             int stride_h = 1, int stride_w = 1);

/// Window maxima over [H,W,C] input, valid placement only; backward routes
/// each adjoint to the first maximal cell of its window (row-major scan).
Value maxpool2d(Value input, int kh, int kw, int stride_h, int stride_w);

/// Standard LSTM cell: gates i/f/o with sigmoid, tanh candidate;
/// weights act on the concatenation [x; h_prev].
struct LstmParams {
  Value w_i, b_i, w_f, b_f, w_o, b_o, w_g, b_g;
};
std::pair<Value, Value> lstm_cell(Value x, Value h_prev, Value c_prev,
                                  const LstmParams& p);

/// Central finite differences of a scalar function at the given point,
/// one coordinate at a time; the oracle used by every gradient check.
std::vector<Tensor> finite_diff_gradient(
    const std::function<double(std::span<const Tensor>)>& f,
    std::span<const Tensor> at, double step = 1e-6);

}  // namespace isac::ad
