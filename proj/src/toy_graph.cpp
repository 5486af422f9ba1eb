#include "condaudio/toy_graph.hpp"

#include <cmath>
#include <stdexcept>

namespace condaudio::toy {

Graph::NodeId Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return NodeId(nodes_.size() - 1);
}

Graph::NodeId Graph::input(Mat value) {
  Node n;
  n.op = Op::input;
  n.value = std::move(value);
  return push(std::move(n));
}

Graph::NodeId Graph::param(const Mat& value, Mat* grad_sink) {
  Node n;
  n.op = Op::param;
  n.value = value;
  n.sink = grad_sink;
  n.needs_grad = grad_sink != nullptr;
  return push(std::move(n));
}

Graph::NodeId Graph::matmul(NodeId a, NodeId b) {
  Node n;
  n.op = Op::matmul;
  n.a = a;
  n.b = b;
  n.value = condaudio::matmul(at(a).value, at(b).value);
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  return push(std::move(n));
}

Graph::NodeId Graph::add(NodeId a, NodeId b) {
  if (!at(a).value.same_shape(at(b).value)) throw std::invalid_argument("add: shape mismatch");
  Node n;
  n.op = Op::add;
  n.a = a;
  n.b = b;
  n.value = at(a).value;
  for (std::size_t i = 0; i < n.value.size(); ++i) n.value.raw()[i] += at(b).value.raw()[i];
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  return push(std::move(n));
}

Graph::NodeId Graph::add_row(NodeId a, NodeId row) {
  const Mat& r = at(row).value;
  if (r.rows() != 1 || r.cols() != at(a).value.cols())
    throw std::invalid_argument("add_row: row must be 1 x cols(a)");
  Node n;
  n.op = Op::add_row;
  n.a = a;
  n.b = row;
  n.value = at(a).value;
  for (std::size_t i = 0; i < n.value.rows(); ++i)
    for (std::size_t j = 0; j < n.value.cols(); ++j) n.value(i, j) += r(0, j);
  n.needs_grad = at(a).needs_grad || at(row).needs_grad;
  return push(std::move(n));
}

Graph::NodeId Graph::scale(NodeId a, double s) {
  Node n;
  n.op = Op::scale;
  n.a = a;
  n.scalar = s;
  n.value = at(a).value;
  for (double& v : n.value.raw()) v *= s;
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Graph::NodeId Graph::tanh_act(NodeId a) {
  Node n;
  n.op = Op::tanh_act;
  n.a = a;
  n.value = at(a).value;
  for (double& v : n.value.raw()) v = std::tanh(v);
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Graph::NodeId Graph::softmax_rows(NodeId a) {
  Node n;
  n.op = Op::softmax_rows;
  n.a = a;
  n.value = at(a).value;
  for (std::size_t i = 0; i < n.value.rows(); ++i) {
    double* row = n.value.row(i);
    double mx = row[0];
    for (std::size_t j = 1; j < n.value.cols(); ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < n.value.cols(); ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (std::size_t j = 0; j < n.value.cols(); ++j) row[j] /= sum;
  }
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Graph::NodeId Graph::concat_rows(NodeId a, NodeId b) {
  const Mat& ma = at(a).value;
  const Mat& mb = at(b).value;
  if (ma.cols() != mb.cols()) throw std::invalid_argument("concat_rows: width mismatch");
  Node n;
  n.op = Op::concat_rows;
  n.a = a;
  n.b = b;
  n.value = Mat(ma.rows() + mb.rows(), ma.cols());
  for (std::size_t i = 0; i < ma.rows(); ++i)
    for (std::size_t j = 0; j < ma.cols(); ++j) n.value(i, j) = ma(i, j);
  for (std::size_t i = 0; i < mb.rows(); ++i)
    for (std::size_t j = 0; j < mb.cols(); ++j) n.value(ma.rows() + i, j) = mb(i, j);
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  return push(std::move(n));
}

Graph::NodeId Graph::slice_rows(NodeId a, std::size_t begin, std::size_t end) {
  const Mat& m = at(a).value;
  if (begin > end || end > m.rows()) throw std::invalid_argument("slice_rows: bad range");
  Node n;
  n.op = Op::slice_rows;
  n.a = a;
  n.i0 = begin;
  n.i1 = end;
  n.value = Mat(end - begin, m.cols());
  for (std::size_t i = begin; i < end; ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) n.value(i - begin, j) = m(i, j);
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Graph::NodeId Graph::transpose_of(NodeId a) {
  Node n;
  n.op = Op::transpose_of;
  n.a = a;
  n.value = condaudio::transpose(at(a).value);
  n.needs_grad = at(a).needs_grad;
  return push(std::move(n));
}

Graph::NodeId Graph::mul_by_scalar(NodeId a, NodeId scalar) {
  const Mat& s = at(scalar).value;
  if (s.rows() != 1 || s.cols() != 1)
    throw std::invalid_argument("mul_by_scalar: scalar must be 1 x 1");
  Node n;
  n.op = Op::mul_by_scalar;
  n.a = a;
  n.b = scalar;
  n.value = at(a).value;
  for (double& v : n.value.raw()) v *= s(0, 0);
  n.needs_grad = at(a).needs_grad || at(scalar).needs_grad;
  return push(std::move(n));
}

Graph::NodeId Graph::conv_rows(NodeId x, NodeId w, NodeId b, std::size_t stride) {
  const Mat& mx = at(x).value;
  const Mat& mw = at(w).value;
  const Mat& mb = at(b).value;
  if (stride == 0) throw std::invalid_argument("conv_rows: stride must be positive");
  if (mw.rows() != stride * mx.cols())
    throw std::invalid_argument("conv_rows: weight rows must equal stride * input width");
  if (mb.rows() != 1 || mb.cols() != mw.cols())
    throw std::invalid_argument("conv_rows: bias must be 1 x output width");

  const std::size_t out_rows = (mx.rows() + stride - 1) / stride;
  Node n;
  n.op = Op::conv_rows;
  n.a = x;
  n.b = w;
  n.c = b;
  n.i0 = stride;
  n.value = Mat(out_rows, mw.cols());
  for (std::size_t r = 0; r < out_rows; ++r) {
    for (std::size_t j = 0; j < mw.cols(); ++j) n.value(r, j) = mb(0, j);
    for (std::size_t k = 0; k < stride; ++k) {
      const std::size_t src = r * stride + k;
      if (src >= mx.rows()) break;  // zero-padded tail
      for (std::size_t c = 0; c < mx.cols(); ++c) {
        const double xv = mx(src, c);
        if (xv == 0.0) continue;
        const std::size_t wrow = k * mx.cols() + c;
        for (std::size_t j = 0; j < mw.cols(); ++j) n.value(r, j) += xv * mw(wrow, j);
      }
    }
  }
  n.needs_grad = at(x).needs_grad || at(w).needs_grad || at(b).needs_grad;
  return push(std::move(n));
}

Graph::NodeId Graph::gather_rows(NodeId table, std::vector<std::size_t> idx) {
  const Mat& t = at(table).value;
  for (auto i : idx)
    if (i >= t.rows()) throw std::invalid_argument("gather_rows: index out of range");
  Node n;
  n.op = Op::gather_rows;
  n.a = table;
  n.indices = std::move(idx);
  n.value = Mat(n.indices.size(), t.cols());
  for (std::size_t i = 0; i < n.indices.size(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) n.value(i, j) = t(n.indices[i], j);
  n.needs_grad = at(table).needs_grad;
  return push(std::move(n));
}

Graph::NodeId Graph::mean_sq_diff(NodeId a, NodeId b) {
  if (!at(a).value.same_shape(at(b).value))
    throw std::invalid_argument("mean_sq_diff: shape mismatch");
  Node n;
  n.op = Op::mean_sq_diff;
  n.a = a;
  n.b = b;
  n.value = Mat(1, 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < at(a).value.size(); ++i) {
    const double d = at(a).value.raw()[i] - at(b).value.raw()[i];
    acc += d * d;
  }
  n.value(0, 0) = acc / double(at(a).value.size());
  n.needs_grad = at(a).needs_grad || at(b).needs_grad;
  return push(std::move(n));
}

void Graph::backward(NodeId root) {
  Node& r = at(root);
  if (r.value.rows() != 1 || r.value.cols() != 1)
    throw std::invalid_argument("backward: root must be scalar");

  for (auto& n : nodes_)
    if (n.needs_grad) n.grad = Mat(n.value.rows(), n.value.cols());
  r.grad = Mat(1, 1, 1.0);

  auto grad_of = [&](int id) -> Mat& { return at(id).grad; };
  auto wants = [&](int id) { return id >= 0 && at(id).needs_grad; };

  for (auto id = NodeId(nodes_.size()) - 1; id >= 0; --id) {
    Node& n = at(id);
    if (!n.needs_grad) continue;
    const Mat& g = n.grad;
    switch (n.op) {
      case Op::input:
        break;
      case Op::param:
        if (n.sink) {
          if (!n.sink->same_shape(g)) throw std::logic_error("param sink shape mismatch");
          for (std::size_t i = 0; i < g.size(); ++i) n.sink->raw()[i] += g.raw()[i];
        }
        break;
      case Op::matmul: {
        if (wants(n.a)) {
          Mat da = condaudio::matmul(g, condaudio::transpose(at(n.b).value));
          for (std::size_t i = 0; i < da.size(); ++i) grad_of(n.a).raw()[i] += da.raw()[i];
        }
        if (wants(n.b)) {
          Mat db = condaudio::matmul(condaudio::transpose(at(n.a).value), g);
          for (std::size_t i = 0; i < db.size(); ++i) grad_of(n.b).raw()[i] += db.raw()[i];
        }
        break;
      }
      case Op::add:
        if (wants(n.a))
          for (std::size_t i = 0; i < g.size(); ++i) grad_of(n.a).raw()[i] += g.raw()[i];
        if (wants(n.b))
          for (std::size_t i = 0; i < g.size(); ++i) grad_of(n.b).raw()[i] += g.raw()[i];
        break;
      case Op::add_row:
        if (wants(n.a))
          for (std::size_t i = 0; i < g.size(); ++i) grad_of(n.a).raw()[i] += g.raw()[i];
        if (wants(n.b)) {
          Mat& gb = grad_of(n.b);
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
        }
        break;
      case Op::scale:
        if (wants(n.a))
          for (std::size_t i = 0; i < g.size(); ++i)
            grad_of(n.a).raw()[i] += n.scalar * g.raw()[i];
        break;
      case Op::tanh_act:
        if (wants(n.a))
          for (std::size_t i = 0; i < g.size(); ++i) {
            const double y = n.value.raw()[i];
            grad_of(n.a).raw()[i] += (1.0 - y * y) * g.raw()[i];
          }
        break;
      case Op::softmax_rows:
        if (wants(n.a)) {
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < g.rows(); ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < g.cols(); ++j) dot += g(i, j) * n.value(i, j);
            for (std::size_t j = 0; j < g.cols(); ++j)
              ga(i, j) += n.value(i, j) * (g(i, j) - dot);
          }
        }
        break;
      case Op::concat_rows: {
        const std::size_t ra = at(n.a).value.rows();
        if (wants(n.a)) {
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < ra; ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) ga(i, j) += g(i, j);
        }
        if (wants(n.b)) {
          Mat& gb = grad_of(n.b);
          for (std::size_t i = ra; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) gb(i - ra, j) += g(i, j);
        }
        break;
      }
      case Op::slice_rows:
        if (wants(n.a)) {
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) ga(n.i0 + i, j) += g(i, j);
        }
        break;
      case Op::transpose_of:
        if (wants(n.a)) {
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) ga(j, i) += g(i, j);
        }
        break;
      case Op::mul_by_scalar: {
        const double s = at(n.b).value(0, 0);
        if (wants(n.a))
          for (std::size_t i = 0; i < g.size(); ++i)
            grad_of(n.a).raw()[i] += s * g.raw()[i];
        if (wants(n.b)) {
          double acc = 0.0;
          for (std::size_t i = 0; i < g.size(); ++i)
            acc += g.raw()[i] * at(n.a).value.raw()[i];
          grad_of(n.b)(0, 0) += acc;
        }
        break;
      }
      case Op::conv_rows: {
        const Mat& mx = at(n.a).value;
        const Mat& mw = at(n.b).value;
        const std::size_t stride = n.i0;
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t k = 0; k < stride; ++k) {
            const std::size_t src = r * stride + k;
            if (src >= mx.rows()) break;
            for (std::size_t c = 0; c < mx.cols(); ++c) {
              const std::size_t wrow = k * mx.cols() + c;
              if (wants(n.a)) {
                double acc = 0.0;
                for (std::size_t j = 0; j < g.cols(); ++j) acc += g(r, j) * mw(wrow, j);
                grad_of(n.a)(src, c) += acc;
              }
              if (wants(n.b)) {
                const double xv = mx(src, c);
                for (std::size_t j = 0; j < g.cols(); ++j)
                  grad_of(n.b)(wrow, j) += xv * g(r, j);
              }
            }
          }
          if (wants(n.c))
            for (std::size_t j = 0; j < g.cols(); ++j) grad_of(n.c)(0, j) += g(r, j);
        }
        break;
      }
      case Op::gather_rows:
        if (wants(n.a)) {
          Mat& ga = grad_of(n.a);
          for (std::size_t i = 0; i < n.indices.size(); ++i)
            for (std::size_t j = 0; j < g.cols(); ++j) ga(n.indices[i], j) += g(i, j);
        }
        break;
      case Op::mean_sq_diff: {
        const double scale = 2.0 * g(0, 0) / double(at(n.a).value.size());
        for (std::size_t i = 0; i < at(n.a).value.size(); ++i) {
          const double d = at(n.a).value.raw()[i] - at(n.b).value.raw()[i];
          if (wants(n.a)) grad_of(n.a).raw()[i] += scale * d;
          if (wants(n.b)) grad_of(n.b).raw()[i] -= scale * d;
        }
        break;
      }
    }
  }
}

}  // namespace condaudio::toy
