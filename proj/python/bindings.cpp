#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "perdec/audit.hpp"
#include "perdec/bayes.hpp"
#include "perdec/error.hpp"
#include "perdec/experiment.hpp"
#include "perdec/io.hpp"
#include "perdec/solver.hpp"

namespace py = pybind11;
using namespace perdec;

namespace {

ResponseRule rule_from(std::optional<double> eta) {
  return eta ? ResponseRule::quantal(*eta) : ResponseRule::strict();
}

py::array_t<double> to_array(const Vec& v) { return py::array_t<double>(v.size(), v.data()); }

RandomizedPredictor predictor_from(const py::array_t<double, py::array::c_style | py::array::forcecast>& w) {
  if (w.ndim() != 1) throw Error("python", "predictor weights must be one-dimensional");
  return RandomizedPredictor(Vec(w.data(), w.data() + w.size()));
}

Dataset dataset_from(const std::vector<std::string>& contexts,
                     const py::array_t<double, py::array::c_style | py::array::forcecast>& outcomes) {
  if (outcomes.ndim() != 2) throw Error("python", "outcomes must be a two-dimensional array (n, d)");
  const auto n = static_cast<std::size_t>(outcomes.shape(0)), d = static_cast<std::size_t>(outcomes.shape(1));
  if (contexts.size() != n) throw Error("python", "one context id per outcome row is required");
  std::vector<Sample> rows;
  rows.reserve(n);
  for (std::size_t s = 0; s < n; ++s) rows.push_back({contexts[s], {}, Vec(outcomes.data(s, 0), outcomes.data(s, 0) + d)});
  return Dataset(std::move(rows));
}

py::array_t<double> outcome_matrix(const Dataset& data) {
  py::array_t<double> out({data.size(), data.dim()});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t s = 0; s < data.size(); ++s)
    for (std::size_t j = 0; j < data.dim(); ++j) view(s, j) = data[s].outcome[j];
  return out;
}

// Residuals E[(y_j - h_j) b_i(h, a)] as an (N, d, m) array.
py::array_t<double> residual_tensor(const CalibrationReport& r) {
  py::array_t<double> out({r.receivers(), r.dim(), r.actions()});
  std::copy(r.residuals().begin(), r.residuals().end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Persuasive decision-calibrated prediction: instances, audits and the Lagrangian solver.";
  py::register_exception<Error>(m, "PerdecError", PyExc_ValueError);
  m.attr("__version__") = version();

  py::class_<Instance>(m, "Instance")
      .def_static("from_json", [](const std::string& text) { return instance_from_json(Json::parse(text)); })
      .def_static("load", &load_instance, py::arg("path"))
      .def_static("fixture", &fixture_instance, py::arg("name"))
      .def_static(
          "generate",
          [](std::size_t receivers, std::size_t actions, std::size_t dim, std::size_t hypotheses,
             std::size_t contexts, const std::string& support, std::uint64_t seed) {
            GeneratorSpec spec{receivers, actions, dim, hypotheses, contexts,
                               support == "sign" ? OutcomeSupport::kSign : OutcomeSupport::kBinary, ""};
            return generate_instance(spec, seed);
          },
          py::arg("receivers") = 1, py::arg("actions") = 2, py::arg("dim") = 1, py::arg("hypotheses") = 3,
          py::arg("contexts") = 4, py::arg("support") = "binary", py::arg("seed") = 0)
      .def("to_json", [](const Instance& i) { return instance_to_json(i).dump(2); })
      .def("save", [](const Instance& i, const std::filesystem::path& p) { save_instance(i, p); })
      .def("with_empirical_mean", &with_empirical_mean_hypothesis, py::arg("data"), py::arg("id") = "empirical_mean")
      .def_property_readonly("dim", &Instance::dim)
      .def_property_readonly("num_receivers", &Instance::num_receivers)
      .def_property_readonly("num_actions", &Instance::num_actions)
      .def_property_readonly("lipschitz", &Instance::lipschitz)
      .def_property_readonly("hypothesis_ids", [](const Instance& i) {
        std::vector<std::string> ids;
        for (const auto& h : i.hypotheses()) ids.push_back(h.id());
        return ids;
      });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init(&dataset_from), py::arg("contexts"), py::arg("outcomes"))
      .def_static("load", &load_dataset, py::arg("path"))
      .def_static("sample", &sample_dataset, py::arg("instance"), py::arg("n"), py::arg("seed") = 0)
      .def("save", [](const Dataset& d, const std::filesystem::path& p) { save_dataset(d, p); })
      .def("__len__", &Dataset::size)
      .def_property_readonly("outcomes", &outcome_matrix)
      .def_property_readonly("contexts", [](const Dataset& d) {
        std::vector<std::string> out;
        for (const auto& s : d.samples()) out.push_back(s.context);
        return out;
      })
      .def("mean_outcome", [](const Dataset& d) { return to_array(d.mean_outcome()); });

  m.def(
      "sender_utility",
      [](const Instance& i, const Dataset& d, const py::array_t<double>& w, std::optional<double> eta) {
        return expected_sender_utility(i, d, predictor_from(w), rule_from(eta));
      },
      py::arg("instance"), py::arg("data"), py::arg("weights"), py::arg("eta") = py::none());

  m.def(
      "decision_calibration",
      [](const Instance& i, const Dataset& d, const py::array_t<double>& w, std::optional<double> eta) {
        const auto r = decision_calibration_error(i, d, predictor_from(w), rule_from(eta));
        const auto at = r.argmax();
        py::dict out;
        out["error"] = r.max_abs();
        out["residuals"] = residual_tensor(r);
        out["witness"] = py::make_tuple(at.sign == Sign::kPlus ? "+" : "-", at.receiver, at.coord, at.action);
        return out;
      },
      py::arg("instance"), py::arg("data"), py::arg("weights"), py::arg("eta") = py::none(),
      "DecCE (SmDecCE when eta is given) with residuals shaped (receivers, dim, actions).");

  m.def(
      "full_calibration_error",
      [](const Instance& i, const Dataset& d, const py::array_t<double>& w) {
        return full_calibration_error(i, d, predictor_from(w));
      },
      py::arg("instance"), py::arg("data"), py::arg("weights"));

  m.def(
      "regret",
      [](const Instance& i, const Dataset& d, const py::array_t<double>& w, const std::string& kind,
         std::optional<double> eta) {
        const auto r = regret_audit(i, d, predictor_from(w), rule_from(eta), parse_regret_kind(kind));
        py::dict out;
        out["value"] = r.value;
        out["receiver"] = r.receiver;
        out["impersonated"] = r.impersonated;
        out["remap"] = r.remap;
        out["per_receiver"] = to_array(r.per_receiver);
        return out;
      },
      py::arg("instance"), py::arg("data"), py::arg("weights"), py::arg("kind") = "swap", py::arg("eta") = py::none());

  m.def(
      "solve",
      [](const Instance& i, const Dataset& d, double gamma, double epsilon, std::optional<double> eta,
         std::optional<std::uint64_t> tmax, std::optional<double> dual_mass) {
        GameConfig g;
        g.gamma = gamma;
        g.epsilon = epsilon;
        g.rule = rule_from(eta);
        g.t_max = tmax;
        g.dual_mass = dual_mass;
        std::optional<SolveResult> solved;
        {
          py::gil_scoped_release release;
          solved.emplace(solve_persuasive(i, d, g));
        }
        const SolveResult& res = *solved;
        py::dict out;
        out["weights"] = to_array(res.predictor.weights());
        out["dual"] = to_array(res.dual.entries());
        out["gap"] = res.gap;
        out["rounds"] = res.rounds;
        out["converged"] = res.converged;
        out["horizon"] = res.horizon;
        return out;
      },
      py::arg("instance"), py::arg("data"), py::arg("gamma") = 0.0, py::arg("epsilon") = 0.1,
      py::arg("eta") = py::none(), py::arg("tmax") = py::none(), py::arg("dual_mass") = py::none());

  m.def(
      "brute_force",
      [](const Instance& i, const Dataset& d, double gamma, std::optional<double> eta, double step) {
        const auto r = brute_force_opt(i, d, gamma, rule_from(eta), step);
        py::dict out;
        out["value"] = r.value;
        out["weights"] = to_array(r.weights);
        out["grid_slack"] = r.grid_slack;
        return out;
      },
      py::arg("instance"), py::arg("data"), py::arg("gamma"), py::arg("eta") = py::none(), py::arg("step") = 0.01);

  m.def(
      "signaling_bound",
      [](const Instance& i, const Dataset& d) {
        const auto r = obedient_signaling_upper_bound(i, d);
        py::dict out;
        out["value"] = r.value;
        out["prior"] = to_array(r.states.prior);
        out["scheme"] = r.scheme;
        return out;
      },
      py::arg("instance"), py::arg("data"));
}
