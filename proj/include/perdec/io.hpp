#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "perdec/instance.hpp"
#include "perdec/solver.hpp"

namespace perdec {

using Json = nlohmann::json;

// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

Json instance_to_json(const Instance& instance);
Instance instance_from_json(const Json& j);
Instance load_instance(const std::filesystem::path& path);
void save_instance(const Instance& instance, const std::filesystem::path& path);

// CSV with header context_id,y_1..y_d and optional trailing x_1..x_p
// feature columns.
Dataset parse_dataset_csv(std::istream& in);
void write_dataset_csv(const Dataset& data, std::ostream& out);
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& data, const std::filesystem::path& path);

// {"weights": [{"hypothesis": id, "weight": w}, ...]}; zero weights omitted.
Json predictor_to_json(const Instance& instance, const RandomizedPredictor& f);
RandomizedPredictor predictor_from_json(const Instance& instance, const Json& j);
RandomizedPredictor load_predictor(const Instance& instance, const std::filesystem::path& path);
void save_predictor(const Instance& instance, const RandomizedPredictor& f,
                    const std::filesystem::path& path);

// One JSON object per line.
void write_trace_jsonl(const Instance& instance, const std::vector<TraceRecord>& trace, std::ostream& out);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const Json& j, const std::filesystem::path& path);

}  // namespace perdec
