#pragma once

// Shared graph builders for the toy diffusion model. Internal to the library:
// public entry points live in toy_model.hpp / toy_train.hpp.

#include <map>
#include <string>

#include "condaudio/toy_graph.hpp"
#include "condaudio/toy_model.hpp"

namespace condaudio::toy::detail {

struct ForwardCtx {
  Graph g;
  const ToyModel& model;
  ParamSet* grads;  // nullptr => inference only

  ForwardCtx(const ToyModel& m, ParamSet* grad_sinks) : model(m), grads(grad_sinks) {}

  Graph::NodeId param(const std::string& name);
  Graph::NodeId attention(Graph::NodeId queries_from, Graph::NodeId kv_from,
                          const std::string& prefix);
  Graph::NodeId standardize_node(const ControlInput& input);
  Graph::NodeId encode_control_node(Graph::NodeId standardized, ConditionType type);
  // One token group per layer; null conditioning binds the learned null token
  // directly, bypassing the strided convolutions.
  std::vector<Graph::NodeId> control_groups(const Conditioning& cond);
  std::vector<Graph::NodeId> control_groups_from_tokens(Graph::NodeId tokens);
  Graph::NodeId fusion_node(Graph::NodeId mel, Graph::NodeId control, std::size_t layer);
  Graph::NodeId text_node(const Conditioning& cond);
  Graph::NodeId predict_noise_node(const Mat& x_t, std::size_t t,
                                   Graph::NodeId text,
                                   const std::vector<Graph::NodeId>* groups);

 private:
  std::map<std::string, Graph::NodeId> bound_;
};

}  // namespace condaudio::toy::detail
