#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "thermpc/building.hpp"

namespace thermpc {

/// Other end of a conductance: another state node or one of the fixed-temperature boundaries.
struct Endpoint {
  enum class Kind { Node, Ambient, Ground };
  Kind kind = Kind::Node;
  std::size_t node = 0;

  static Endpoint to_node(std::size_t i) { return {Kind::Node, i}; }
  static Endpoint ambient() { return {Kind::Ambient, 0}; }
  static Endpoint ground() { return {Kind::Ground, 0}; }
  bool is_node() const { return kind == Kind::Node; }
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

struct RcNode {
  std::string label;                // zone id, or "<element id>/L<layer>"
  double capacitance = 0;           // J/K
  std::optional<std::size_t> zone;  // index into BuildingDescription::zones for air nodes
  friend bool operator==(const RcNode&, const RcNode&) = default;
};

struct Conductance {
  std::size_t a = 0;
  Endpoint b;
  double value = 0;  // W/K
  friend bool operator==(const Conductance&, const Conductance&) = default;
};

/// External heat flux entering a node: coefficient * source signal.
/// Actuator sources carry the flux law gain (W/K); solar carries area * transmittance (m2);
/// internal gains carry 1.
struct FluxInjection {
  enum class Source { Actuator, Solar, InternalGain };
  std::size_t node = 0;
  Source source = Source::Actuator;
  std::size_t index = 0;  // actuator index or disturbance channel index
  double coefficient = 0;
  friend bool operator==(const FluxInjection&, const FluxInjection&) = default;
};

/// Lumped thermal network: zone air nodes first (declaration order), then one node per
/// massive construction layer, sorted by (element id, layer index).
struct RcNetwork {
  std::vector<RcNode> nodes;
  std::vector<Conductance> conductances;
  std::vector<FluxInjection> injections;
  std::size_t zone_count = 0;

  std::size_t size() const { return nodes.size(); }
  /// Sum of conductances touching node i.
  double total_conductance(std::size_t i) const;
  friend bool operator==(const RcNetwork&, const RcNetwork&) = default;
};

RcNetwork build_rc_network(const BuildingDescription& desc);

/// Multiplies every node capacitance by `factor` (plant/model mismatch studies).
RcNetwork scale_capacitances(RcNetwork net, double factor);

}  // namespace thermpc
