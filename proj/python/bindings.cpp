// Copyright 2026 The ramcts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Python bindings: games, contexts, rollouts under interventions, posterior
// contexts, the searchers and the harness metrics.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>

#include "ramcts/errors.hpp"
#include "ramcts/harness.hpp"

namespace py = pybind11;
using namespace ramcts;

namespace {

py::object to_py(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::null: return py::none();
    case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
    case nlohmann::json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case nlohmann::json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
    case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
    case nlohmann::json::value_t::array: {
      py::list out;
      for (const auto& v : j) out.append(to_py(v));
      return out;
    }
    default: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_py(v);
      return out;
    }
  }
}

struct Game {
  std::shared_ptr<const DecPomdpModel> model;
};

Game make_game(const std::string& name, int hand_size, bool deterministic, bool bowers) {
  auto kind = parse_game(name);
  if (!kind) throw ContractViolation("unknown game '" + name + "'");
  GameConfig cfg;
  cfg.kind = *kind;
  cfg.hand_size = hand_size;
  cfg.deterministic_opponents = deterministic;
  cfg.bowers = bowers;
  return {make_model(cfg)};
}

Method method_from(const std::string& name) {
  auto m = parse_method(name);
  if (!m) throw ContractViolation("unknown method '" + name + "'");
  return *m;
}

Mode mode_from(const std::string& name) {
  auto m = parse_mode(name);
  if (!m) throw ContractViolation("unknown mode '" + name + "'");
  return *m;
}

py::list fractions(const std::vector<Degree>& degrees) {
  py::list out;
  for (const Degree& d : degrees) out.append(py::make_tuple(d.num, d.den));
  return out;
}

py::dict result_dict(const SearchResult& r) {
  py::dict d;
  d["degrees"] = fractions(r.assignment.degrees);
  d["values"] = r.assignment.values();
  d["steps"] = r.steps;
  d["iterations"] = r.iterations;
  d["complete"] = r.complete;
  d["pairs"] = r.found.num_pairs();
  d["assignment"] = to_py(r.assignment.to_json());
  return d;
}

}  // namespace

PYBIND11_MODULE(_ramcts, m) {
  m.doc() = "Responsibility attribution in card-game Dec-POMDPs";

  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<InvalidIntervention>(m, "InvalidIntervention", PyExc_ValueError);
  py::register_exception<InconsistentTrajectory>(m, "InconsistentTrajectory", PyExc_RuntimeError);
  py::register_exception<NotAFailure>(m, "NotAFailure", PyExc_ValueError);
  py::register_exception<GenerationExhausted>(m, "GenerationExhausted", PyExc_RuntimeError);

  py::class_<Game>(m, "Game")
      .def(py::init(&make_game), py::arg("game") = "euchre", py::arg("hand_size") = 5,
           py::arg("deterministic") = false, py::arg("bowers") = false)
      .def_property_readonly("name", [](const Game& g) { return g.model->name(); })
      .def_property_readonly("horizon", [](const Game& g) { return g.model->horizon(); })
      .def_property_readonly("num_agents", [](const Game& g) { return g.model->num_agents(); })
      .def("__repr__", [](const Game& g) { return "<Game " + g.model->name() + ">"; });

  py::class_<Context>(m, "Context")
      .def(py::init<std::uint64_t>(), py::arg("seed") = 0)
      .def_property_readonly("seed", &Context::seed)
      .def_property_readonly("is_posterior", &Context::is_posterior)
      .def("to_json", [](const Context& c) { return c.to_json().dump(); })
      .def_static("from_json", [](const std::string& s) { return Context::from_json(nlohmann::json::parse(s)); });

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("length", &Trajectory::length)
      .def_property_readonly("actions", [](const Trajectory& t) {
        std::vector<std::vector<ActionId>> out;
        for (const auto& s : t.steps) out.push_back(s.actions);
        return out;
      })
      .def_property_readonly("scores", [](const Trajectory& t) {
        return py::make_tuple(t.outcome.agent_score, t.outcome.opponent_score);
      })
      .def_property_readonly("agents_lose", [](const Trajectory& t) { return t.outcome.agents_lose(); })
      .def("to_jsonl", [](const Trajectory& t) { return trajectory_to_jsonl(t); })
      .def_static("from_jsonl", &trajectory_from_jsonl)
      .def("__eq__", [](const Trajectory& a, const Trajectory& b) { return a == b; });

  m.def(
      "rollout",
      [](const Game& g, const Context& ctx, const std::vector<std::tuple<int, int, int>>& interventions) {
        InterventionSet x;
        for (auto [agent, t, action] : interventions) x.add({agent, t, action});
        return rollout(*g.model, ctx, x);
      },
      py::arg("game"), py::arg("context"), py::arg("interventions") = std::vector<std::tuple<int, int, int>>{},
      "Episode under a context with (agent, t, action) interventions.");

  m.def(
      "generate_losing",
      [](const Game& g, int count, std::uint64_t seed) {
        py::list out;
        for (const auto& inst : generate_losing_trajectories(*g.model, count, seed)) {
          out.append(py::make_tuple(inst.id, Context(inst.context_seed), inst.trajectory));
        }
        return out;
      },
      py::arg("game"), py::arg("count"), py::arg("seed") = 0,
      "Losing episodes as (id, context, trajectory) tuples.");

  m.def(
      "posterior_context",
      [](const Game& g, const Trajectory& observed, std::uint64_t seed) {
        return posterior_sample_context(*g.model, observed, seed);
      },
      py::arg("game"), py::arg("observed"), py::arg("seed") = 0);

  m.def("method_names", &method_names);

  m.def(
      "search",
      [](const Game& g, const Context& ctx, const Trajectory& factual, const std::string& method,
         std::int64_t budget, std::uint64_t seed, int max_size) {
        return result_dict(run_method(method_from(method), *g.model, ctx, factual, budget, seed, max_size));
      },
      py::arg("game"), py::arg("context"), py::arg("factual"), py::arg("method") = "RA-MCTS",
      py::arg("budget") = 100000, py::arg("seed") = 0, py::arg("max_size") = 4);

  m.def(
      "estimate_under_uncertainty",
      [](const Game& g, const Trajectory& observed, int samples, std::int64_t budget, std::uint64_t seed) {
        MctsParams p;
        p.budget = budget;
        p.seed = seed;
        const auto u = estimate_under_uncertainty(*g.model, observed, samples, p);
        py::dict d;
        d["mean"] = u.mean;
        d["mean_exact"] = fractions(u.mean_exact);
        py::list per;
        for (const auto& s : u.samples) per.append(result_dict(s));
        d["samples"] = per;
        return d;
      },
      py::arg("game"), py::arg("observed"), py::arg("samples") = 10, py::arg("budget") = 100000,
      py::arg("seed") = 0);

  m.def(
      "exact_reference",
      [](const Game& g, const Context& ctx, const Trajectory& factual, int max_size) {
        return fractions(exact_reference(*g.model, ctx, factual, Mode::kKnownContext, {}, max_size).degrees);
      },
      py::arg("game"), py::arg("context"), py::arg("factual"), py::arg("max_size") = 4);

  m.def(
      "epsilon",
      [](const std::vector<double>& found, const std::vector<double>& reference, const std::string& mode) {
        return epsilon_metric(found, reference, mode_from(mode));
      },
      py::arg("found"), py::arg("reference"), py::arg("mode") = "known-context");

  m.def("step_grid", &step_grid, py::arg("budget"), py::arg("start") = 1000, py::arg("factor") = 1.3);
}
