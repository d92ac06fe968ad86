#pragma once

#include <filesystem>
#include <string>

#include "swarmguide/formation.hpp"
#include "swarmguide/impedance.hpp"

#ifndef SWARMGUIDE_SOURCE_ROOT
#define SWARMGUIDE_SOURCE_ROOT "."
#endif

namespace fixtures {

inline std::filesystem::path source_root() { return SWARMGUIDE_SOURCE_ROOT; }
inline std::filesystem::path preset(const std::string& name) { return source_root() / "scenarios" / (name + ".json"); }
inline std::filesystem::path fixture(const std::string& name) { return source_root() / "tests" / "fixtures" / name; }

/// Four-drone rhombus with L = H = 0.5 m and links h1, 12, 13, 24, 34.
inline swarmguide::FormationSpec rhombus(double mass = 1.9, double damping = 12.6, double stiffness = 21.0) {
  namespace sg = swarmguide;
  sg::FormationSpec spec;
  spec.drones = {
      {1, {sg::AnchorKind::Hand, -1, -1}, {-0.5, 0.0, 0.0}},
      {2, {sg::AnchorKind::Drone, 0, -1}, {-0.5, 0.5, 0.0}},
      {3, {sg::AnchorKind::Drone, 0, -1}, {-0.5, -0.5, 0.0}},
      {4, {sg::AnchorKind::Midpoint, 1, 2}, {-0.5, 0.0, 0.0}},
  };
  const auto params = sg::make_impedance_params(mass, damping, stiffness);
  for (auto [s, t] : {std::pair{sg::kHandNode, 0}, std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 3}, std::pair{2, 3}}) {
    sg::LinkSpec link;
    link.source = s;
    link.target = t;
    link.params = params;
    spec.links.push_back(link);
  }
  spec.polygon_order = {0, 1, 3, 2};
  return spec;
}

}  // namespace fixtures
