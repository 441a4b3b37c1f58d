#include "isac/autodiff.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace isac::ad {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

int checked_product(std::span<const int> shape) {
  long long n = 1;
  for (int d : shape) {
    require(d >= 0, "negative dimension");
    n *= d;
  }
  require(n <= (1ll << 31), "tensor too large");
  return static_cast<int>(n);
}

}  // namespace

int shape_size(std::span<const int> shape) { return checked_product(shape); }

std::string shape_str(std::span<const int> shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(std::vector<int> s, Eigen::ArrayXd d)
    : shape(std::move(s)), data(std::move(d)) {
  require(shape_size(shape) == static_cast<int>(data.size()),
          "tensor data does not match shape " + shape_str(shape));
}

Tensor Tensor::zeros(std::vector<int> s) {
  int n = shape_size(s);
  return Tensor(std::move(s), Eigen::ArrayXd::Zero(n));
}

Tensor Tensor::full(std::vector<int> s, double v) {
  int n = shape_size(s);
  return Tensor(std::move(s), Eigen::ArrayXd::Constant(n, v));
}

Tensor Tensor::scalar(double v) {
  return Tensor({}, Eigen::ArrayXd::Constant(1, v));
}

Tensor Tensor::of(std::vector<int> s, std::initializer_list<double> v) {
  Eigen::ArrayXd d(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) d[i++] = x;
  return Tensor(std::move(s), std::move(d));
}

double Tensor::item() const {
  require(data.size() == 1, "item() on non-scalar tensor " + shape_str(shape));
  return data[0];
}

const Tensor& Value::val() const { return g->value(*this); }
const Tensor& Value::grad() const { return g->grad(*this); }

/// Private-access shim for op implementations that are not named friends.
class OpBuilder {
 public:
  static int add_node(Graph& g, Tensor val, std::vector<int> parents,
                      std::function<void(Graph&, int)> back, const char* tag) {
    return g.add_node(std::move(val), std::move(parents), std::move(back),
                      tag);
  }
  static const Tensor& value(const Graph& g, int id) {
    return g.node_value(id);
  }
  static const Tensor& adjoint(Graph& g, int id) {
    return g.nodes_[id].adjoint;
  }
  static Tensor* adj(Graph& g, int id) { return g.adj(id); }
};

int Graph::add_node(Tensor val, std::vector<int> parents,
                    std::function<void(Graph&, int)> back, const char* tag,
                    bool force_grad) {
  Node n;
  n.value = std::move(val);
  n.parents = std::move(parents);
  n.tag = tag;
  n.needs_grad = force_grad;
  for (int p : n.parents)
    if (nodes_[p].needs_grad) n.needs_grad = true;
  if (n.needs_grad) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Value Graph::constant(Tensor v) {
  return {add_node(std::move(v), {}, {}, "const"), this};
}

Value Graph::leaf(Tensor v) {
  return {add_node(std::move(v), {}, {}, "leaf", true), this};
}

Tensor* Graph::adj(int id) {
  Node& n = nodes_[id];
  if (!n.needs_grad) return nullptr;
  if (n.adjoint.data.size() == 0) n.adjoint = Tensor::zeros(n.value.shape);
  return &n.adjoint;
}

const Tensor& Graph::value(Value v) const { return nodes_.at(v.id).value; }

const Tensor& Graph::grad(Value v) {
  Node& n = nodes_.at(v.id);
  if (n.adjoint.data.size() == 0) n.adjoint = Tensor::zeros(n.value.shape);
  return n.adjoint;
}

void Graph::backward(Value root) {
  require(root.ok() && root.g == this, "backward: foreign handle");
  Node& r = nodes_.at(root.id);
  require(r.value.size() == 1,
          "backward: root must be scalar, got " + shape_str(r.value.shape));
  for (Node& n : nodes_) n.adjoint = Tensor();
  r.adjoint = Tensor::full(r.value.shape, 1.0);
  if (!r.needs_grad) return;
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.back && n.adjoint.data.size() > 0) n.back(*this, i);
  }
}

namespace {

Graph* same_graph(Value a, Value b) {
  require(a.ok() && b.ok() && a.g == b.g, "operands from different graphs");
  return a.g;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.same_shape(b), std::string(op) + ": shape mismatch " +
                               shape_str(a.shape) + " vs " +
                               shape_str(b.shape));
}

using Fwd1 = double (*)(double);

}  // namespace

Value add(Value a, Value b) {
  Graph* g = same_graph(a, b);
  const Tensor &av = g->node_value(a.id), &bv = g->node_value(b.id);
  require_same_shape(av, bv, "add");
  Tensor out(av.shape, av.data + bv.data);
  int pa = a.id, pb = b.id;
  int id = g->add_node(std::move(out), {pa, pb},
                       [pa, pb](Graph& gr, int self) {
                         const Tensor& go = gr.nodes_[self].adjoint;
                         if (Tensor* t = gr.adj(pa)) t->data += go.data;
                         if (Tensor* t = gr.adj(pb)) t->data += go.data;
                       },
                       "add");
  return {id, g};
}

Value sub(Value a, Value b) {
  Graph* g = same_graph(a, b);
  const Tensor &av = g->node_value(a.id), &bv = g->node_value(b.id);
  require_same_shape(av, bv, "sub");
  Tensor out(av.shape, av.data - bv.data);
  int pa = a.id, pb = b.id;
  int id = g->add_node(std::move(out), {pa, pb},
                       [pa, pb](Graph& gr, int self) {
                         const Tensor& go = gr.nodes_[self].adjoint;
                         if (Tensor* t = gr.adj(pa)) t->data += go.data;
                         if (Tensor* t = gr.adj(pb)) t->data -= go.data;
                       },
                       "sub");
  return {id, g};
}

Value mul(Value a, Value b) {
  Graph* g = same_graph(a, b);
  const Tensor &av = g->node_value(a.id), &bv = g->node_value(b.id);
  require_same_shape(av, bv, "multiply");
  Tensor out(av.shape, av.data * bv.data);
  int pa = a.id, pb = b.id;
  int id = g->add_node(
      std::move(out), {pa, pb},
      [pa, pb](Graph& gr, int self) {
        const Tensor& go = gr.nodes_[self].adjoint;
        if (Tensor* t = gr.adj(pa)) t->data += go.data * gr.nodes_[pb].value.data;
        if (Tensor* t = gr.adj(pb)) t->data += go.data * gr.nodes_[pa].value.data;
      },
      "multiply");
  return {id, g};
}

Value divide(Value a, Value b) {
  Graph* g = same_graph(a, b);
  const Tensor &av = g->node_value(a.id), &bv = g->node_value(b.id);
  require_same_shape(av, bv, "divide");
  Tensor out(av.shape, av.data / bv.data);
  int pa = a.id, pb = b.id;
  int id = g->add_node(
      std::move(out), {pa, pb},
      [pa, pb](Graph& gr, int self) {
        const Tensor& go = gr.nodes_[self].adjoint;
        const Tensor& an = gr.nodes_[pa].value;
        const Tensor& bn = gr.nodes_[pb].value;
        Tensor* ta = gr.adj(pa);
        Tensor* tb = gr.adj(pb);
        for (int i = 0; i < go.size(); ++i) {
          double gi = go[i];
          if (gi == 0.0) continue;  // saturated consumers contribute nothing
          if (ta) (*ta)[i] += gi / bn[i];
          if (tb) (*tb)[i] -= gi * an[i] / (bn[i] * bn[i]);
        }
      },
      "divide");
  return {id, g};
}

namespace {

Value unary(Value a, const char* tag, const std::function<double(double)>& f,
            const std::function<double(double, double, double)>& df) {
  // df(x, y, g) returns the contribution to x's adjoint.
  Graph* g = a.g;
  require(a.ok(), "unary op on empty handle");
  const Tensor& av = g->value(a);
  Tensor out = Tensor::zeros(av.shape);
  for (int i = 0; i < av.size(); ++i) out[i] = f(av[i]);
  int pa = a.id;
  int id = OpBuilder::add_node(
      *g, std::move(out), {pa},
      [pa, df](Graph& gr, int self) {
        const Tensor& go = OpBuilder::adjoint(gr, self);
        const Tensor& xv = OpBuilder::value(gr, pa);
        const Tensor& yv = OpBuilder::value(gr, self);
        if (Tensor* t = OpBuilder::adj(gr, pa))
          for (int i = 0; i < go.size(); ++i)
            (*t)[i] += df(xv[i], yv[i], go[i]);
      },
      tag);
  return {id, g};
}

}  // namespace

Value add_scalar(Value a, double c) {
  return unary(
      a, "add_scalar", [c](double x) { return x + c; },
      [](double, double, double g) { return g; });
}

Value scale(Value a, double c) {
  return unary(
      a, "scale", [c](double x) { return c * x; },
      [c](double, double, double g) { return c * g; });
}

Value neg(Value a) { return scale(a, -1.0); }

Value log2(Value a) {
  return unary(
      a, "log2", [](double x) { return std::log2(x); },
      [](double x, double, double g) { return g / (x * std::numbers::ln2); });
}

Value square(Value a) {
  return unary(
      a, "square", [](double x) { return x * x; },
      [](double x, double, double g) { return 2.0 * x * g; });
}

Value ramp(Value a) {
  return unary(
      a, "ramp", [](double x) { return x > 0 ? x : 0.0; },
      [](double x, double, double g) { return x > 0 ? g : 0.0; });
}

Value sigmoid(Value a) {
  return unary(
      a, "sigmoid",
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y, double g) { return y * (1.0 - y) * g; });
}

Value tanh(Value a) {
  return unary(
      a, "tanh", [](double x) { return std::tanh(x); },
      [](double, double y, double g) { return (1.0 - y * y) * g; });
}

Value clamp_max(Value a, double cap) {
  return unary(
      a, "clamp_max", [cap](double x) { return x < cap ? x : cap; },
      [cap](double x, double, double g) { return x < cap ? g : 0.0; });
}

Value matmul(Value a, Value b) {
  Graph* g = same_graph(a, b);
  const Tensor &av = g->node_value(a.id), &bv = g->node_value(b.id);
  require(av.rank() == 2, "matmul: left operand must be rank 2, got " +
                              shape_str(av.shape));
  require(bv.rank() == 2 || bv.rank() == 1,
          "matmul: right operand must be rank 1 or 2, got " +
              shape_str(bv.shape));
  const int m = av.shape[0], n = av.shape[1];
  const bool vec = bv.rank() == 1;
  const int n2 = vec ? bv.shape[0] : bv.shape[0];
  const int p = vec ? 1 : bv.shape[1];
  require(n == n2, "matmul: inner dimensions disagree " + shape_str(av.shape) +
                       " vs " + shape_str(bv.shape));

  using RowMat =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MapC = Eigen::Map<const RowMat>;
  using Map = Eigen::Map<RowMat>;

  Tensor out = Tensor::zeros(vec ? std::vector<int>{m}
                                 : std::vector<int>{m, p});
  Map(out.data.data(), m, p) =
      MapC(av.data.data(), m, n) * MapC(bv.data.data(), n, p);

  int pa = a.id, pb = b.id;
  int id = g->add_node(
      std::move(out), {pa, pb},
      [pa, pb, m, n, p](Graph& gr, int self) {
        MapC go(gr.nodes_[self].adjoint.data.data(), m, p);
        MapC am(gr.nodes_[pa].value.data.data(), m, n);
        MapC bm(gr.nodes_[pb].value.data.data(), n, p);
        if (Tensor* t = gr.adj(pa))
          Map(t->data.data(), m, n) += go * bm.transpose();
        if (Tensor* t = gr.adj(pb))
          Map(t->data.data(), n, p) += am.transpose() * go;
      },
      "matmul");
  return {id, g};
}

Value sum(Value a) {
  Graph* g = a.g;
  const Tensor& av = g->value(a);
  Tensor out = Tensor::scalar(av.data.sum());
  int pa = a.id;
  int id = g->add_node(std::move(out), {pa},
                       [pa](Graph& gr, int self) {
                         double go = gr.nodes_[self].adjoint[0];
                         if (Tensor* t = gr.adj(pa)) t->data += go;
                       },
                       "sum");
  return {id, g};
}

Value mean(Value a) {
  Graph* g = a.g;
  const Tensor& av = g->value(a);
  require(av.size() > 0, "mean of empty tensor");
  const double inv = 1.0 / av.size();
  Tensor out = Tensor::scalar(av.data.sum() * inv);
  int pa = a.id;
  int id = g->add_node(std::move(out), {pa},
                       [pa, inv](Graph& gr, int self) {
                         double go = gr.nodes_[self].adjoint[0] * inv;
                         if (Tensor* t = gr.adj(pa)) t->data += go;
                       },
                       "mean");
  return {id, g};
}

Value reshape(Value a, std::vector<int> shape) {
  Graph* g = a.g;
  const Tensor& av = g->value(a);
  require(shape_size(shape) == av.size(),
          "reshape: size mismatch " + shape_str(av.shape) + " -> " +
              shape_str(shape));
  Tensor out(shape, av.data);
  int pa = a.id;
  int id = g->add_node(std::move(out), {pa},
                       [pa](Graph& gr, int self) {
                         const Tensor& go = gr.nodes_[self].adjoint;
                         if (Tensor* t = gr.adj(pa)) t->data += go.data;
                       },
                       "reshape");
  return {id, g};
}

namespace {

struct AxisSplit {
  int outer = 1, axis_dim = 1, inner = 1;
};

AxisSplit split_axes(std::span<const int> shape, int axis) {
  require(axis >= 0 && axis < static_cast<int>(shape.size()),
          "axis out of range for shape " + shape_str(shape));
  AxisSplit s;
  for (int i = 0; i < axis; ++i) s.outer *= shape[i];
  s.axis_dim = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

Value concat(std::span<const Value> parts, int axis) {
  require(!parts.empty(), "concat: no operands");
  Graph* g = parts[0].g;
  std::vector<int> shape = g->value(parts[0]).shape;
  require(axis >= 0 && axis < static_cast<int>(shape.size()),
          "concat: axis out of range");
  int axis_total = 0;
  std::vector<int> ids;
  for (const Value& v : parts) {
    require(v.g == g, "concat: operands from different graphs");
    const Tensor& t = g->value(v);
    require(t.rank() == static_cast<int>(shape.size()),
            "concat: rank mismatch");
    for (int d = 0; d < t.rank(); ++d)
      require(d == axis || t.shape[d] == shape[d],
              "concat: off-axis shape mismatch " + shape_str(t.shape) +
                  " vs " + shape_str(shape));
    axis_total += t.shape[axis];
    ids.push_back(v.id);
  }
  std::vector<int> out_shape = shape;
  out_shape[axis] = axis_total;
  Tensor out = Tensor::zeros(out_shape);
  AxisSplit os = split_axes(out_shape, axis);
  int offset = 0;  // in axis units
  for (const Value& v : parts) {
    const Tensor& t = g->value(v);
    AxisSplit ps = split_axes(t.shape, axis);
    for (int o = 0; o < os.outer; ++o) {
      int dst = (o * os.axis_dim + offset) * os.inner;
      int src = o * ps.axis_dim * ps.inner;
      for (int i = 0; i < ps.axis_dim * ps.inner; ++i)
        out[dst + i] = t[src + i];
    }
    offset += ps.axis_dim;
  }

  std::vector<int> parent_axis_dims;
  for (const Value& v : parts)
    parent_axis_dims.push_back(g->value(v).shape[axis]);
  int id = g->add_node(
      std::move(out), ids,
      [ids, parent_axis_dims, os](Graph& gr, int self) {
        const Tensor& go = gr.nodes_[self].adjoint;
        int offset = 0;
        for (std::size_t pi = 0; pi < ids.size(); ++pi) {
          int pad = parent_axis_dims[pi];
          if (Tensor* t = gr.adj(ids[pi])) {
            for (int o = 0; o < os.outer; ++o) {
              int src = (o * os.axis_dim + offset) * os.inner;
              int dst = o * pad * os.inner;
              for (int i = 0; i < pad * os.inner; ++i)
                (*t)[dst + i] += go[src + i];
            }
          }
          offset += pad;
        }
      },
      "concat");
  return {id, g};
}

Value slice(Value a, int axis, int start, int len) {
  Graph* g = a.g;
  const Tensor& av = g->value(a);
  AxisSplit s = split_axes(av.shape, axis);
  require(start >= 0 && len >= 1 && start + len <= s.axis_dim,
          "slice: range [" + std::to_string(start) + "," +
              std::to_string(start + len) + ") out of axis size " +
              std::to_string(s.axis_dim));
  std::vector<int> out_shape = av.shape;
  out_shape[axis] = len;
  Tensor out = Tensor::zeros(out_shape);
  for (int o = 0; o < s.outer; ++o) {
    int src = (o * s.axis_dim + start) * s.inner;
    int dst = o * len * s.inner;
    for (int i = 0; i < len * s.inner; ++i) out[dst + i] = av[src + i];
  }
  int pa = a.id;
  int id = g->add_node(
      std::move(out), {pa},
      [pa, s, start, len](Graph& gr, int self) {
        const Tensor& go = gr.nodes_[self].adjoint;
        if (Tensor* t = gr.adj(pa)) {
          for (int o = 0; o < s.outer; ++o) {
            int dst = (o * s.axis_dim + start) * s.inner;
            int src = o * len * s.inner;
            for (int i = 0; i < len * s.inner; ++i)
              (*t)[dst + i] += go[src + i];
          }
        }
      },
      "slice");
  return {id, g};
}

Value dot(Value a, Value b) { return sum(mul(a, b)); }

namespace {

struct ConvDims {
  int h, w, c, f, kh, kw, sh, sw;
  int oh, ow, pad_top, pad_left;
};

ConvDims conv_dims(const Tensor& in, const Tensor& ker, Pad pad, int sh,
                   int sw) {
  require(in.rank() == 3, "conv2d: input must be [H,W,C], got " +
                              shape_str(in.shape));
  require(ker.rank() == 4, "conv2d: kernels must be [F,kh,kw,C], got " +
                               shape_str(ker.shape));
  require(sh >= 1 && sw >= 1, "conv2d: strides must be positive");
  ConvDims d;
  d.h = in.shape[0];
  d.w = in.shape[1];
  d.c = in.shape[2];
  d.f = ker.shape[0];
  d.kh = ker.shape[1];
  d.kw = ker.shape[2];
  d.sh = sh;
  d.sw = sw;
  require(ker.shape[3] == d.c, "conv2d: kernel channels " +
                                   std::to_string(ker.shape[3]) +
                                   " do not match input channels " +
                                   std::to_string(d.c));
  if (pad == Pad::same) {
    d.oh = (d.h + sh - 1) / sh;
    d.ow = (d.w + sw - 1) / sw;
    int pad_h = std::max(0, (d.oh - 1) * sh + d.kh - d.h);
    int pad_w = std::max(0, (d.ow - 1) * sw + d.kw - d.w);
    d.pad_top = pad_h / 2;
    d.pad_left = pad_w / 2;
  } else {
    require(d.h >= d.kh && d.w >= d.kw,
            "conv2d: kernel larger than input under valid padding");
    d.oh = (d.h - d.kh) / sh + 1;
    d.ow = (d.w - d.kw) / sw + 1;
    d.pad_top = 0;
    d.pad_left = 0;
  }
  return d;
}

}  // namespace

Value conv2d(Value input, Value kernels, Value bias, Pad pad, int stride_h,
             int stride_w) {
  Graph* g = same_graph(input, kernels);
  require(bias.g == g, "conv2d: operands from different graphs");
  const Tensor& in = g->value(input);
  const Tensor& ker = g->value(kernels);
  const Tensor& bv = g->value(bias);
  ConvDims d = conv_dims(in, ker, pad, stride_h, stride_w);
  require(bv.rank() == 1 && bv.shape[0] == d.f,
          "conv2d: bias must be [F], got " + shape_str(bv.shape));

  Tensor out = Tensor::zeros({d.oh, d.ow, d.f});
  for (int y = 0; y < d.oh; ++y)
    for (int x = 0; x < d.ow; ++x)
      for (int f = 0; f < d.f; ++f) {
        double acc = bv[f];
        for (int dy = 0; dy < d.kh; ++dy) {
          int iy = y * d.sh - d.pad_top + dy;
          if (iy < 0 || iy >= d.h) continue;
          for (int dx = 0; dx < d.kw; ++dx) {
            int ix = x * d.sw - d.pad_left + dx;
            if (ix < 0 || ix >= d.w) continue;
            for (int c = 0; c < d.c; ++c)
              acc += in[(iy * d.w + ix) * d.c + c] *
                     ker[((f * d.kh + dy) * d.kw + dx) * d.c + c];
          }
        }
        out[(y * d.ow + x) * d.f + f] = acc;
      }

  int pi = input.id, pk = kernels.id, pb = bias.id;
  int id = g->add_node(
      std::move(out), {pi, pk, pb},
      [pi, pk, pb, d](Graph& gr, int self) {
        const Tensor& go = gr.nodes_[self].adjoint;
        const Tensor& in = gr.nodes_[pi].value;
        const Tensor& ker = gr.nodes_[pk].value;
        Tensor* din = gr.adj(pi);
        Tensor* dker = gr.adj(pk);
        Tensor* dbias = gr.adj(pb);
        for (int y = 0; y < d.oh; ++y)
          for (int x = 0; x < d.ow; ++x)
            for (int f = 0; f < d.f; ++f) {
              double grad = go[(y * d.ow + x) * d.f + f];
              if (dbias) (*dbias)[f] += grad;
              for (int dy = 0; dy < d.kh; ++dy) {
                int iy = y * d.sh - d.pad_top + dy;
                if (iy < 0 || iy >= d.h) continue;
                for (int dx = 0; dx < d.kw; ++dx) {
                  int ix = x * d.sw - d.pad_left + dx;
                  if (ix < 0 || ix >= d.w) continue;
                  for (int c = 0; c < d.c; ++c) {
                    int ii = (iy * d.w + ix) * d.c + c;
                    int ki = ((f * d.kh + dy) * d.kw + dx) * d.c + c;
                    if (din) (*din)[ii] += grad * ker[ki];
                    if (dker) (*dker)[ki] += grad * in[ii];
                  }
                }
              }
            }
      },
      "conv2d");
  return {id, g};
}

Value maxpool2d(Value input, int kh, int kw, int stride_h, int stride_w) {
  Graph* g = input.g;
  const Tensor& in = g->value(input);
  require(in.rank() == 3, "maxpool2d: input must be [H,W,C], got " +
                              shape_str(in.shape));
  require(kh >= 1 && kw >= 1 && stride_h >= 1 && stride_w >= 1,
          "maxpool2d: window and strides must be positive");
  const int h = in.shape[0], w = in.shape[1], c = in.shape[2];
  require(h >= kh && w >= kw, "maxpool2d: window " + std::to_string(kh) + "x" +
                                  std::to_string(kw) +
                                  " larger than input " + shape_str(in.shape));
  const int oh = (h - kh) / stride_h + 1;
  const int ow = (w - kw) / stride_w + 1;

  Tensor out = Tensor::zeros({oh, ow, c});
  std::vector<int> arg(static_cast<std::size_t>(oh) * ow * c);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x)
      for (int ch = 0; ch < c; ++ch) {
        double best = -std::numeric_limits<double>::infinity();
        int best_i = -1;
        for (int dy = 0; dy < kh; ++dy)
          for (int dx = 0; dx < kw; ++dx) {
            int ii = ((y * stride_h + dy) * w + (x * stride_w + dx)) * c + ch;
            if (in[ii] > best) {  // strict: first occurrence wins ties
              best = in[ii];
              best_i = ii;
            }
          }
        int oi = (y * ow + x) * c + ch;
        out[oi] = best;
        arg[oi] = best_i;
      }

  int pa = input.id;
  int id = g->add_node(std::move(out), {pa},
                       [pa, arg](Graph& gr, int self) {
                         const Tensor& go = gr.nodes_[self].adjoint;
                         if (Tensor* t = gr.adj(pa))
                           for (int i = 0; i < go.size(); ++i)
                             (*t)[arg[i]] += go[i];
                       },
                       "maxpool2d");
  return {id, g};
}

std::pair<Value, Value> lstm_cell(Value x, Value h_prev, Value c_prev,
                                  const LstmParams& p) {
  std::array<Value, 2> zs{x, h_prev};
  Value z = concat(std::span<const Value>(zs.data(), zs.size()), 0);
  Value i = sigmoid(add(matmul(p.w_i, z), p.b_i));
  Value f = sigmoid(add(matmul(p.w_f, z), p.b_f));
  Value o = sigmoid(add(matmul(p.w_o, z), p.b_o));
  Value cand = tanh(add(matmul(p.w_g, z), p.b_g));
  Value c = add(mul(f, c_prev), mul(i, cand));
  Value h = mul(o, tanh(c));
  return {h, c};
}

std::vector<Tensor> finite_diff_gradient(
    const std::function<double(std::span<const Tensor>)>& f,
    std::span<const Tensor> at, double step) {
  std::vector<Tensor> point(at.begin(), at.end());
  std::vector<Tensor> grads;
  grads.reserve(point.size());
  for (auto& t : point) grads.push_back(Tensor::zeros(t.shape));
  for (std::size_t pi = 0; pi < point.size(); ++pi) {
    for (int i = 0; i < point[pi].size(); ++i) {
      double keep = point[pi][i];
      point[pi][i] = keep + step;
      double up = f(point);
      point[pi][i] = keep - step;
      double down = f(point);
      point[pi][i] = keep;
      grads[pi][i] = (up - down) / (2.0 * step);
    }
  }
  return grads;
}

}  // namespace isac::ad
