#pragma once

#include <cstddef>
#include <vector>

#include "condaudio/mat.hpp"

namespace condaudio::toy {

// Minimal reverse-mode tape over Mat. Forward values are computed eagerly as
// nodes are appended; backward() walks the tape once and accumulates
// parameter gradients into caller-owned sinks. Just enough machinery for a
// desk-scale diffusion model, no more.
class Graph {
 public:
  using NodeId = int;

  NodeId input(Mat value);                       // constant leaf
  NodeId param(const Mat& value, Mat* grad_sink);  // leaf; nullptr sink = frozen

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);                // same shape
  NodeId add_row(NodeId a, NodeId row);          // row: 1 x C broadcast over rows of a
  NodeId scale(NodeId a, double s);
  NodeId tanh_act(NodeId a);
  NodeId softmax_rows(NodeId a);
  NodeId concat_rows(NodeId a, NodeId b);
  NodeId slice_rows(NodeId a, std::size_t begin, std::size_t end);
  NodeId transpose_of(NodeId a);
  NodeId mul_by_scalar(NodeId a, NodeId scalar);  // scalar: 1 x 1 node
  // Strided 1-D convolution over rows: kernel = stride rows per window,
  // weight laid out as (stride * C_in) x C_out, zero-padded tail, plus bias.
  NodeId conv_rows(NodeId x, NodeId w, NodeId b, std::size_t stride);
  NodeId gather_rows(NodeId table, std::vector<std::size_t> idx);
  NodeId mean_sq_diff(NodeId a, NodeId b);        // 1 x 1

  const Mat& value(NodeId id) const { return nodes_[std::size_t(id)].value; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(root)/d(root) = 1 and accumulates into every param sink.
  void backward(NodeId root);

 private:
  enum class Op {
    input,
    param,
    matmul,
    add,
    add_row,
    scale,
    tanh_act,
    softmax_rows,
    concat_rows,
    slice_rows,
    transpose_of,
    mul_by_scalar,
    conv_rows,
    gather_rows,
    mean_sq_diff,
  };

  struct Node {
    Op op;
    int a = -1, b = -1, c = -1;
    Mat value;
    Mat grad;
    bool needs_grad = false;
    double scalar = 0.0;
    std::size_t i0 = 0, i1 = 0;
    std::vector<std::size_t> indices;
    Mat* sink = nullptr;
  };

  NodeId push(Node node);
  Node& at(NodeId id) { return nodes_[std::size_t(id)]; }
  const Node& at(NodeId id) const { return nodes_[std::size_t(id)]; }

  std::vector<Node> nodes_;
};

}  // namespace condaudio::toy
