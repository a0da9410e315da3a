#include "fpih/net/checkpoint.hpp"

#include <nlohmann/json.hpp>
#include <stdexcept>

namespace fpih::net {

json vecx_to_json(const VecX& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

VecX vecx_from_json(const json& j) {
  VecX v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

namespace {

const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Dense: return "dense";
    case LayerKind::Softplus: return "softplus";
    case LayerKind::Residual: return "residual";
  }
  return "?";
}

LayerKind kind_from_name(const std::string& s) {
  if (s == "dense") return LayerKind::Dense;
  if (s == "softplus") return LayerKind::Softplus;
  if (s == "residual") return LayerKind::Residual;
  throw std::invalid_argument("unknown layer kind: " + s);
}

}  // namespace

json topology_to_json(const Topology& t) {
  json layers = json::array();
  for (const auto& l : t.layers)
    layers.push_back({{"kind", kind_name(l.kind)},
                      {"in", l.in},
                      {"out", l.out},
                      {"hidden", l.hidden},
                      {"init_scale", l.init_scale}});
  return {{"input_dim", t.input_dim}, {"layers", layers}};
}

Topology topology_from_json(const json& j) {
  Topology t;
  t.input_dim = j.at("input_dim").get<int>();
  for (const auto& lj : j.at("layers")) {
    LayerSpec l;
    l.kind = kind_from_name(lj.at("kind").get<std::string>());
    l.in = lj.at("in").get<int>();
    l.out = lj.at("out").get<int>();
    l.hidden = lj.at("hidden").get<int>();
    l.init_scale = lj.at("init_scale").get<double>();
    t.layers.push_back(l);
  }
  return t;
}

json network_to_json(const Network& n) {
  return {{"topology", topology_to_json(n.topology())},
          {"params", vecx_to_json(n.params())}};
}

Network network_from_json(const json& j) {
  Network n(topology_from_json(j.at("topology")));
  VecX p = vecx_from_json(j.at("params"));
  if (p.size() != n.params().size())
    throw std::invalid_argument(
        "checkpoint: parameter count inconsistent with topology");
  n.params() = p;
  return n;
}

json adam_to_json(const AdamState& s) {
  return {{"m", vecx_to_json(s.m)},
          {"v", vecx_to_json(s.v)},
          {"t", s.t},
          {"rejected", s.rejected}};
}

AdamState adam_from_json(const json& j) {
  AdamState s;
  s.m = vecx_from_json(j.at("m"));
  s.v = vecx_from_json(j.at("v"));
  s.t = j.at("t").get<long>();
  s.rejected = j.at("rejected").get<long>();
  return s;
}

}  // namespace fpih::net
