#include "fixtures.hpp"

namespace perdec::testing {

Receiver threshold_receiver() { return Receiver({{-1.0}, {1.0}}, {1.0, 0.0}, kUnitBox); }

SenderUtility prefer_a0_sender(std::size_t receivers) {
  std::size_t joint = 1;
  for (std::size_t i = 0; i < receivers; ++i) joint *= 2;
  Vec alpha(joint, 0.0);
  alpha[0] = 1.0;
  return SenderUtility(alpha, std::vector<Vec>(joint, Vec{0.0}), kUnitBox);
}

Hypothesis constant(const std::string& id, const std::vector<std::string>& contexts, Vec value) {
  TabularMap map;
  for (const auto& c : contexts) map.predictions[c] = value;
  return Hypothesis(id, map);
}

Instance fix_a() {
  return Instance(1, {threshold_receiver()}, prefer_a0_sender(),
                  {constant("h-", {"x0"}, {0.45}), constant("h+", {"x0"}, {0.55})});
}

Dataset fix_a_data(std::size_t k) {
  std::vector<Sample> s;
  for (std::size_t i = 0; i < 2 * k; ++i) s.push_back({"x0", {}, {static_cast<double>(i % 2)}});
  return Dataset(s);
}

Instance fix_b() {
  TabularMap star;
  star.predictions["x1"] = {0.2};
  star.predictions["x2"] = {0.8};
  return Instance(1, {threshold_receiver()}, prefer_a0_sender(),
                  {Hypothesis("h*", star), constant("h_mean", {"x1", "x2"}, {0.5})});
}

Dataset fix_b_data() {
  std::vector<Sample> s;
  for (int i = 0; i < 10; ++i) s.push_back({"x1", {}, {i < 2 ? 1.0 : 0.0}});
  for (int i = 0; i < 10; ++i) s.push_back({"x2", {}, {i < 8 ? 1.0 : 0.0}});
  return Dataset(s);
}

}  // namespace perdec::testing
