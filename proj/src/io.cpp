#include "perdec/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "perdec/error.hpp"

namespace perdec {

namespace {

[[noreturn]] void fail(const std::string& message) { throw Error("io", message); }

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(where + ": field '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first < last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last)
    fail("dataset line " + std::to_string(line) + ": '" + s + "' is not a number");
  return v;
}

std::string support_name(OutcomeSupport s) { return s == OutcomeSupport::kBinary ? "binary" : "sign"; }

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) fail("cannot format number");
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Instance

Json instance_to_json(const Instance& instance) {
  Json j;
  j["format"] = "perdec-instance/1";
  j["dim"] = instance.dim();
  j["outcome_box"] = {instance.box().lo, instance.box().hi};
  j["joint_action_cap"] = instance.joint_action_cap();
  Json receivers = Json::array();
  for (const auto& r : instance.receivers()) {
    Json actions = Json::array();
    for (std::size_t a = 0; a < r.num_actions(); ++a)
      actions.push_back({{"weights", r.weights(a)}, {"offset", r.offset(a)}});
    receivers.push_back({{"actions", actions}});
  }
  j["receivers"] = receivers;
  Json joint = Json::array();
  for (std::size_t k = 0; k < instance.num_joint_actions(); ++k)
    joint.push_back({{"actions", instance.decode_joint(k)},
                     {"alpha", instance.sender().alpha(k)},
                     {"beta", instance.sender().beta(k)}});
  j["sender"] = {{"joint_actions", joint}};
  Json hyps = Json::array();
  for (const auto& h : instance.hypotheses()) {
    if (h.is_tabular()) {
      Json preds = Json::object();
      for (const auto& [ctx, v] : h.tabular().predictions) preds[ctx] = v;
      hyps.push_back({{"id", h.id()}, {"kind", "tabular"}, {"predictions", preds}});
    } else {
      hyps.push_back({{"id", h.id()}, {"kind", "affine"}, {"matrix", h.affine().matrix},
                      {"offset", h.affine().offset}});
    }
  }
  j["hypotheses"] = hyps;
  if (const auto& model = instance.outcome_model()) {
    Json contexts = Json::array();
    for (const auto& c : model->contexts)
      contexts.push_back({{"id", c.id}, {"weight", c.weight}, {"mean", c.mean}});
    j["outcome_model"] = {{"support", support_name(model->support)}, {"exact", model->exact},
                          {"contexts", contexts}};
  }
  return j;
}

Instance instance_from_json(const Json& j) {
  const std::string where = "instance";
  const auto dim = get<std::size_t>(j, "dim", where);
  OutcomeBox box;
  if (j.contains("outcome_box")) {
    const auto b = get<std::vector<double>>(j, "outcome_box", where);
    if (b.size() != 2) fail("instance: outcome_box must be [lo, hi]");
    box = {b[0], b[1]};
  }
  const std::size_t cap = j.contains("joint_action_cap") ? get<std::size_t>(j, "joint_action_cap", where)
                                                         : kDefaultJointActionCap;
  std::vector<Receiver> receivers;
  for (const auto& r : get<Json>(j, "receivers", where)) {
    std::vector<Vec> w;
    Vec c;
    for (const auto& a : get<Json>(r, "actions", "receiver")) {
      w.push_back(get<Vec>(a, "weights", "receiver action"));
      c.push_back(get<double>(a, "offset", "receiver action"));
    }
    receivers.emplace_back(std::move(w), std::move(c), box);
  }
  Vec alpha;
  std::vector<Vec> beta;
  for (const auto& a : get<Json>(get<Json>(j, "sender", where), "joint_actions", "sender")) {
    alpha.push_back(get<double>(a, "alpha", "sender joint action"));
    beta.push_back(get<Vec>(a, "beta", "sender joint action"));
  }
  std::vector<Hypothesis> hyps;
  for (const auto& h : get<Json>(j, "hypotheses", where)) {
    const auto id = get<std::string>(h, "id", "hypothesis");
    const auto kind = get<std::string>(h, "kind", "hypothesis '" + id + "'");
    if (kind == "tabular") {
      TabularMap map;
      const Json preds = get<Json>(h, "predictions", "hypothesis '" + id + "'");
      for (const auto& [ctx, v] : preds.items()) map.predictions[ctx] = get<Vec>(preds, ctx.c_str(), "hypothesis '" + id + "'");
      hyps.emplace_back(id, std::move(map));
    } else if (kind == "affine") {
      hyps.emplace_back(id, AffineMap{get<std::vector<Vec>>(h, "matrix", "hypothesis '" + id + "'"),
                                      get<Vec>(h, "offset", "hypothesis '" + id + "'")});
    } else {
      fail("hypothesis '" + id + "': unknown kind '" + kind + "'");
    }
  }
  std::optional<OutcomeModel> model;
  if (j.contains("outcome_model")) {
    const Json& m = j["outcome_model"];
    OutcomeModel om;
    const auto support = get<std::string>(m, "support", "outcome_model");
    if (support == "binary") om.support = OutcomeSupport::kBinary;
    else if (support == "sign") om.support = OutcomeSupport::kSign;
    else fail("outcome_model: unknown support '" + support + "'");
    om.exact = m.value("exact", false);
    for (const auto& c : get<Json>(m, "contexts", "outcome_model"))
      om.contexts.push_back({get<std::string>(c, "id", "context"), get<double>(c, "weight", "context"),
                             get<Vec>(c, "mean", "context")});
    model = std::move(om);
  }
  Instance inst(dim, std::move(receivers), SenderUtility(std::move(alpha), std::move(beta), box),
                std::move(hyps), cap, std::move(model));
  // Explicit action tuples, when given, must follow the canonical order.
  const auto& joint = j["sender"]["joint_actions"];
  for (std::size_t k = 0; k < joint.size(); ++k)
    if (joint[k].contains("actions") && joint[k]["actions"].get<std::vector<std::size_t>>() != inst.decode_joint(k))
      fail("sender joint action " + std::to_string(k) + " is listed out of order");
  return inst;
}

Instance load_instance(const std::filesystem::path& path) {
  return instance_from_json(read_json_file(path));
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
  write_json_file(instance_to_json(instance), path);
}

// ---------------------------------------------------------------------------
// Dataset

Dataset parse_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next_line()) fail("dataset is empty");
  const auto header = split(line);
  if (header.empty() || header[0] != "context_id") fail("dataset header must start with context_id");
  std::size_t d = 0, p = 0;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string expect_y = "y_" + std::to_string(d + 1), expect_x = "x_" + std::to_string(p + 1);
    if (p == 0 && header[c] == expect_y) ++d;
    else if (header[c] == expect_x) ++p;
    else fail("unexpected dataset column '" + header[c] + "'");
  }
  if (d == 0) fail("dataset header has no outcome columns");
  std::vector<Sample> samples;
  while (next_line()) {
    const auto f = split(line);
    if (f.size() != 1 + d + p)
      fail("dataset line " + std::to_string(lineno) + " has " + std::to_string(f.size()) + " fields, expected " +
           std::to_string(1 + d + p));
    Sample s{f[0], Vec(p), Vec(d)};
    for (std::size_t j = 0; j < d; ++j) s.outcome[j] = parse_number(f[1 + j], lineno);
    for (std::size_t k = 0; k < p; ++k) s.features[k] = parse_number(f[1 + d + k], lineno);
    samples.push_back(std::move(s));
  }
  try {
    return Dataset(std::move(samples));
  } catch (const Error& e) {
    fail(std::string("invalid dataset: ") + e.what());
  }
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
  const std::size_t d = data.dim(), p = data[0].features.size();
  out << "context_id";
  for (std::size_t j = 1; j <= d; ++j) out << ",y_" << j;
  for (std::size_t k = 1; k <= p; ++k) out << ",x_" << k;
  out << '\n';
  for (const auto& s : data.samples()) {
    if (s.context.find(',') != std::string::npos) fail("context id '" + s.context + "' contains a comma");
    if (s.features.size() != p) fail("samples have inconsistent feature counts");
    out << s.context;
    for (double y : s.outcome) out << ',' << format_double(y);
    for (double x : s.features) out << ',' << format_double(x);
    out << '\n';
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open dataset '" + path.string() + "'");
  return parse_dataset_csv(in);
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail("cannot write dataset '" + path.string() + "'");
  write_dataset_csv(data, out);
}

// ---------------------------------------------------------------------------
// Predictor and trace

Json predictor_to_json(const Instance& instance, const RandomizedPredictor& f) {
  if (f.size() != instance.num_hypotheses()) fail("predictor does not match the instance");
  Json weights = Json::array();
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f.weight(k) != 0.0) weights.push_back({{"hypothesis", instance.hypothesis(k).id()}, {"weight", f.weight(k)}});
  return {{"weights", weights}};
}

RandomizedPredictor predictor_from_json(const Instance& instance, const Json& j) {
  Vec w(instance.num_hypotheses(), 0.0);
  for (const auto& e : get<Json>(j, "weights", "predictor")) {
    const auto id = get<std::string>(e, "hypothesis", "predictor entry");
    const auto k = instance.find_hypothesis(id);
    if (!k) fail("predictor references unknown hypothesis '" + id + "'");
    w[*k] += get<double>(e, "weight", "predictor entry");
  }
  try {
    return RandomizedPredictor(std::move(w));
  } catch (const Error& e) {
    fail(std::string("invalid predictor: ") + e.what());
  }
}

RandomizedPredictor load_predictor(const Instance& instance, const std::filesystem::path& path) {
  return predictor_from_json(instance, read_json_file(path));
}

void save_predictor(const Instance& instance, const RandomizedPredictor& f,
                    const std::filesystem::path& path) {
  write_json_file(predictor_to_json(instance, f), path);
}

void write_trace_jsonl(const Instance& instance, const std::vector<TraceRecord>& trace, std::ostream& out) {
  for (const auto& r : trace) {
    const Json j{{"round", r.round},
                 {"hypothesis", instance.hypothesis(r.hypothesis).id()},
                 {"index", r.hypothesis},
                 {"gains", r.gains},
                 {"lagrangian", r.lagrangian}};
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Files

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json_file(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

}  // namespace perdec
