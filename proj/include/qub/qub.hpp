// Umbrella header.
#pragma once

#include "coding_sim.hpp"
#include "hypotest.hpp"
#include "io.hpp"
#include "naimark.hpp"
#include "operators.hpp"
#include "random.hpp"
#include "second_order.hpp"
#include "union_bound.hpp"

namespace qub {
inline constexpr const char* kVersion = "1.0.0";
}
