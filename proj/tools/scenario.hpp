#pragma once

#include <functional>
#include <string>

#include <json.hpp>

#include "subeq/manifold.hpp"
#include "subeq/profile.hpp"
#include "subeq/subequation.hpp"

namespace subeq::app {

using Field = std::function<double(const Point&)>;

Warp parse_warp(const nlohmann::json& j);
ManifoldPtr parse_manifold(const nlohmann::json& j);
Profile parse_profile(const nlohmann::json& j);
/// Fields read the distance coordinate and boundary tag of the node a point carries. Without a
/// manifold the distance is |x| and every point counts as interior.
Field parse_field(const nlohmann::json& j, const ManifoldPtr& M);
Subequation parse_subequation(const nlohmann::json& j, int m, const ManifoldPtr& M);

/// Distance coordinate of a point: the node's when it carries one, else r (radial kinds) or |x|.
double distance_of(const ModelManifold* M, const Point& x);

}  // namespace subeq::app
