#pragma once

// Builtin charts and canonical Jenkins-Serrin domains.

#include <optional>
#include <string>
#include <vector>

#include "jsg/chart.hpp"
#include "jsg/domain.hpp"

namespace jsg {

struct Scene {
  std::string name;
  std::string description;
  SubmersionChart chart;
  std::optional<JSDomain> domain;
};

// Bundle curvature of the nil3 scene; its connection gauge is a = -tau y, b = tau x.
inline constexpr double kNil3Tau = 0.5;

std::vector<std::string> builtin_scene_names();
std::string builtin_scene_description(const std::string& name);

// Throws std::invalid_argument for an unknown name.
Scene builtin_scene(const std::string& name);
SubmersionChart builtin_chart(const std::string& name);

// n evenly spaced samples from a to b, both ends included.
std::vector<Vec2> sample_segment(Vec2 a, Vec2 b, int n);

// Closed polygon with labeled straight sides; side k joins corners[k] to corners[k+1].
std::vector<ArcInput> polygon_loop(const std::vector<Vec2>& corners, const std::vector<ArcLabel>& labels,
                                   int samples_per_side = 65);

// Arc of the Poincare-disk geodesic (circle orthogonal to the unit circle, or
// a diameter) from p to q.
std::vector<Vec2> poincare_geodesic(Vec2 p, Vec2 q, int n);

}  // namespace jsg
