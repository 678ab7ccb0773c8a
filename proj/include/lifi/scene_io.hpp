#pragma once

#include <string>

#include "lifi/geometry.hpp"

namespace lifi {

/// Key/value scene description with [room], [ap], [ue] and an optional
/// [body] section.  Lengths in meters, angles in degrees.
Scene load_scene(const std::string& path);
void save_scene(const Scene& scene, const std::string& path);

}  // namespace lifi
