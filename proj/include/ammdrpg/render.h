#pragma once

#include <string>

#include "ammdrpg/instance.h"
#include "ammdrpg/solution.h"

namespace ammdrpg {

// SVG figure of a solution: target graphs, covered sub-segments, one
// mothership path and one drone path per operation. Throws
// std::invalid_argument when the solution belongs to another instance.
std::string render_svg(const Instance& instance, const Solution& s);

}  // namespace ammdrpg
