#include "thermpc/rc_network.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "thermpc/errors.hpp"

namespace thermpc {

double RcNetwork::total_conductance(std::size_t i) const {
  double sum = 0;
  for (const auto& c : conductances) {
    if (c.a == i || (c.b.is_node() && c.b.node == i)) sum += c.value;
  }
  return sum;
}

namespace {

Endpoint resolve(const BuildingDescription& desc, const std::string& ref) {
  if (ref == kAmbient) return Endpoint::ambient();
  if (ref == kGround) return Endpoint::ground();
  return Endpoint::to_node(desc.zone_index(ref));
}

void check_connected(const RcNetwork& net) {
  // node indices 0..n-1, exterior vertex n (AMBIENT and GROUND are both fixed temperatures)
  const std::size_t n = net.size();
  std::vector<std::size_t> parent(n + 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (const auto& c : net.conductances) {
    const std::size_t b = c.b.is_node() ? c.b.node : n;
    parent[find(c.a)] = find(b);
  }
  std::vector<std::string> isolated;
  for (std::size_t i = 0; i < n; ++i) {
    if (find(i) != find(n)) isolated.push_back(net.nodes[i].label);
  }
  if (!isolated.empty()) {
    std::string names;
    for (const auto& s : isolated) names += (names.empty() ? "" : ", ") + s;
    throw DisconnectedNetwork("thermal network component {" + names + "} is not connected to AMBIENT/GROUND");
  }
}

}  // namespace

RcNetwork build_rc_network(const BuildingDescription& desc) {
  RcNetwork net;
  net.zone_count = desc.zones.size();
  for (std::size_t i = 0; i < desc.zones.size(); ++i) {
    net.nodes.push_back({desc.zones[i].id, desc.zones[i].air_heat_capacity, i});
  }

  std::vector<const ConstructionElement*> elements;
  for (const auto& e : desc.elements) elements.push_back(&e);
  std::sort(elements.begin(), elements.end(), [](auto* a, auto* b) { return a->id < b->id; });

  // (zone node, solar channel) -> summed area * transmittance
  std::map<std::pair<std::size_t, std::size_t>, double> solar;

  for (const ConstructionElement* e : elements) {
    Endpoint current = resolve(desc, e->boundary[0]);
    double pending_r = 0;  // K m2/W accumulated since `current`
    for (std::size_t l = 0; l < e->layers.size(); ++l) {
      const Layer& layer = e->layers[l];
      if (!layer.massive()) {
        pending_r += layer.thermal_resistance;
        continue;
      }
      const std::size_t node = net.nodes.size();
      net.nodes.push_back({e->id + "/L" + std::to_string(l), e->area * layer.areal_heat_capacity, std::nullopt});
      const double r = pending_r + 0.5 * layer.thermal_resistance;
      if (current.is_node()) {
        net.conductances.push_back({current.node, Endpoint::to_node(node), e->area / r});
      } else {
        net.conductances.push_back({node, current, e->area / r});
      }
      current = Endpoint::to_node(node);
      pending_r = 0.5 * layer.thermal_resistance;
    }
    const Endpoint last = resolve(desc, e->boundary[1]);
    const double r = pending_r;
    if (current.is_node()) {
      net.conductances.push_back({current.node, last, e->area / r});
    } else {
      net.conductances.push_back({last.node, current, e->area / r});
    }

    if (e->solar_transmittance > 0) {
      const std::string& zone_id = e->boundary[0] == kAmbient ? e->boundary[1] : e->boundary[0];
      const std::size_t zone = desc.zone_index(zone_id);
      const auto channel = desc.solar_channel(desc.zones[zone].orientation);
      if (!channel) throw ValidationError("elements." + e->id, "no irradiance channel for the zone orientation");
      solar[{zone, *channel}] += e->area * e->solar_transmittance;
    }
  }

  for (std::size_t i = 0; i < desc.actuators.size(); ++i) {
    const auto& a = desc.actuators[i];
    net.injections.push_back({desc.zone_index(a.zone_id), FluxInjection::Source::Actuator, i, a.gain_coefficient});
  }
  for (const auto& [key, coefficient] : solar) {
    net.injections.push_back({key.first, FluxInjection::Source::Solar, key.second, coefficient});
  }
  for (std::size_t c = 0; c < desc.disturbances.size(); ++c) {
    const auto& ch = desc.disturbances[c];
    if (ch.kind == ChannelKind::InternalGain) {
      net.injections.push_back({desc.zone_index(ch.zone_id), FluxInjection::Source::InternalGain, c, 1.0});
    }
  }

  check_connected(net);
  return net;
}

RcNetwork scale_capacitances(RcNetwork net, double factor) {
  for (auto& n : net.nodes) n.capacitance *= factor;
  return net;
}

}  // namespace thermpc
