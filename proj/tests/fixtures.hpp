#pragma once

#include "mcn/reference_models.hpp"

// The test suites predate the promotion of the reference networks into the
// library; keep the historical alias.
namespace fixtures {
using namespace mcn::reference;
}  // namespace fixtures
