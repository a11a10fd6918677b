#pragma once

#include <string>
#include <vector>

#include "tsrep/embedding.hpp"

namespace tsrep {

// Renders the embedding as 800x800 SVG scatter plots: one file per dataset
// tag plus a combined overlay, points as radius-2 circles colored per tag,
// axes annotated with the dimension ranges. Returns the written paths.
std::vector<std::string> render_scatter(const Embedding2D& e, const std::string& out_prefix);

}  // namespace tsrep
