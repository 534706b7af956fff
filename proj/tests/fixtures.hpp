#pragma once

#include <vector>

#include "perdec/instance.hpp"

namespace perdec::testing {

inline constexpr OutcomeBox kUnitBox{0.0, 1.0};

// One receiver on y in {0,1}: v(a0, y) = 1 - y, v(a1, y) = y.
Receiver threshold_receiver();
// Sender earns 1 on a0 and 0 on a1.
SenderUtility prefer_a0_sender(std::size_t receivers = 1);

// One context, 2k alternating 0/1 outcomes, H = {h- = 0.45, h+ = 0.55}.
Instance fix_a();
Dataset fix_a_data(std::size_t k = 50);

// Contexts x1, x2 with 10 samples each and means 0.2 / 0.8,
// H = {h* = (0.2, 0.8), h_mean = 0.5}.
Instance fix_b();
Dataset fix_b_data();

Hypothesis constant(const std::string& id, const std::vector<std::string>& contexts, Vec value);

}  // namespace perdec::testing
