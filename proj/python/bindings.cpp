#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "numgame/cli.hpp"
#include "numgame/error.hpp"
#include "numgame/trace.hpp"

namespace py = pybind11;
using namespace numgame;

namespace {

ParticleSet particle_set(const std::vector<std::string>& texts, const std::vector<double>& weights, Instance lo,
                         Instance hi) {
  if (texts.size() != weights.size())
    throw UsageError("hypotheses and weights differ in length");
  const InstanceSpace space(lo, hi);
  std::vector<Particle> ps;
  for (std::size_t i = 0; i < texts.size(); ++i)
    ps.push_back({dsl::Hypothesis::from_text(texts[i], space), weights[i]});
  return ParticleSet(space, ps).normalized();
}

std::string run_jsonl(const std::string& rule, const std::string& policy, std::uint64_t seed,
                      const std::string& profile, int budget, int particles, double conf) {
  const auto concepts = catalog();
  const auto* target = find_concept(concepts, rule);
  if (!target)
    throw UsageError("unknown rule '" + rule + "'");
  RunConfig cfg;
  cfg.policy = policy_from_name(policy);
  cfg.seed = seed;
  cfg.budget = budget;
  cfg.particles = particles;
  cfg.conf_threshold = conf;
  GrammarBackend backend(load_profile(profile), seed);
  return record_to_jsonl(run_trial(*target, cfg, backend));
}

py::tuple cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"numgame"};
  for (const auto& a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code;
  {
    py::gil_scoped_release release;
    code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  }
  return py::make_tuple(code, out.str(), err.str());
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Active Bayesian concept learning in the Number Game";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<StateError>(m, "StateError", base.ptr());
  py::register_exception<BackendUnavailable>(m, "BackendUnavailable", base.ptr());
  py::register_exception<dsl::ParseError>(m, "ParseError", base.ptr());

  m.def("canonicalize", [](const std::string& text) { return dsl::canonicalize(dsl::parse(text)); }, py::arg("text"));
  m.def(
      "extension",
      [](const std::string& text, Instance lo, Instance hi) {
        return dsl::extension_of(dsl::parse(text), InstanceSpace(lo, hi)).members();
      },
      py::arg("text"), py::arg("lo") = 0, py::arg("hi") = 100);
  m.def("catalog", [] {
    std::vector<py::dict> out;
    for (const auto& e : builtin_catalog_entries())
      out.push_back(py::dict(py::arg("id") = e.id, py::arg("tier") = std::string(tier_name(e.tier)),
                             py::arg("dsl") = e.dsl, py::arg("display_name") = e.display_name));
    return out;
  });
  m.def(
      "eig_score",
      [](const std::vector<std::string>& h, const std::vector<double>& w, Instance x, Instance lo, Instance hi) {
        return eig_score(particle_set(h, w, lo, hi), x);
      },
      py::arg("hypotheses"), py::arg("weights"), py::arg("x"), py::arg("lo") = 0, py::arg("hi") = 100);
  m.def(
      "predictive",
      [](const std::vector<std::string>& h, const std::vector<double>& w, Instance x, Instance lo, Instance hi) {
        return predictive(particle_set(h, w, lo, hi), x);
      },
      py::arg("hypotheses"), py::arg("weights"), py::arg("x"), py::arg("lo") = 0, py::arg("hi") = 100);
  m.def(
      "entropy",
      [](const std::vector<std::string>& h, const std::vector<double>& w) {
        return entropy(particle_set(h, w, 0, 100));
      },
      py::arg("hypotheses"), py::arg("weights"));
  m.def("run_trial_jsonl", &run_jsonl, py::arg("rule"), py::arg("policy") = "eig", py::arg("seed") = 0,
        py::arg("profile") = "full", py::arg("budget") = 50, py::arg("particles") = 20, py::arg("conf") = 0.95,
        py::call_guard<py::gil_scoped_release>());
  m.def("cli", &cli, py::arg("args"));
}
