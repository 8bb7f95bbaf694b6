#pragma once

#include <string>

#include "graphmi/gcn.hpp"

namespace gmi {

// Model checkpoint: a versioned magic line, an 8-byte little-endian header
// length, a JSON header (shapes, seed, dataset hash), then the raw weight
// payload as little-endian float64.
void save_model(const GcnModel& model, const std::string& path);
GcnModel load_model(const std::string& path);

}  // namespace gmi
