// Copyright 2026 The Simulacra Authors
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

// Python extension. Values cross the boundary as JSON text; the Python
// package turns them into dicts and lists.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "simulacra/export.hpp"
#include "simulacra/gateway.hpp"
#include "simulacra/persona_expander.hpp"
#include "simulacra/prompt_forge.hpp"
#include "simulacra/scenario.hpp"
#include "simulacra/store.hpp"
#include "simulacra/thread_engine.hpp"

namespace py = pybind11;
using namespace simulacra;

namespace {

Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kValidation, std::string("malformed JSON: ") + e.what());
  }
}

template <typename T>
T parse_as(const std::string& text) {
  try {
    return parse(text).get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kValidation, e.what());
  }
}

CommunityDesign design_from(const std::string& text) {
  std::vector<std::string> violations;
  auto design = parse_design(parse(text), violations);
  if (!design || !violations.empty()) throw ValidationError(violations);
  return *design;
}

Timestamp at_seconds(std::int64_t s) { return Timestamp{std::chrono::seconds{s}}; }

// A gateway plus its audit trail.
class Session {
 public:
  explicit Session(const std::string& backend) : audit_(std::make_shared<AuditLog>()) {
    if (backend == "mock") {
      gateway_ = make_mock_gateway(audit_);
    } else if (backend == "live") {
      auto config = BackendConfig::from_env();
      const auto problems = validate_backend_config(config);
      if (!problems.empty()) throw ValidationError(problems);
      gateway_ = std::make_shared<Gateway>(std::make_shared<HttpBackend>(config), config, audit_);
    } else {
      throw Error(ErrorCode::kPrecondition, "backend must be 'mock' or 'live'");
    }
  }

  std::string generate(const std::string& design, const std::string& config_overrides,
                       std::int64_t created_at, std::size_t workers) {
    const auto d = design_from(design);
    const auto c = merge_config(GenerationConfig{}, parse(config_overrides));
    UniverseOptions opts;
    opts.created_at = at_seconds(created_at);
    opts.workers = workers;
    py::gil_scoped_release release;
    return Json(generate_universe(d, c, *gateway_, opts)).dump();
  }

  std::string personas(const std::string& design, std::size_t count, std::uint64_t seed,
                       double temperature) {
    const auto d = design_from(design);
    py::gil_scoped_release release;
    const auto roster = expand_personas(d.seed_personas, std::max(count, d.seed_personas.size()),
                                        *gateway_, {temperature, seed});
    return Json(roster).dump();
  }

  std::string whatif(const std::string& universe, const std::string& spec, std::uint64_t seed) {
    const auto u = parse_as<Universe>(universe);
    const auto s = whatif_spec_from_json(parse(spec));
    py::gil_scoped_release release;
    const auto r = s.intervention_text ? whatif_intervention(u, s, *gateway_, seed)
                                       : whatif_reply(u, s, *gateway_, seed);
    return to_json(r).dump();
  }

  std::string thread_multiverse(const std::string& universe, const std::string& thread_id,
                                std::size_t at, std::size_t k, std::uint64_t seed) {
    const auto u = parse_as<Universe>(universe);
    py::gil_scoped_release release;
    return to_json(multiverse_thread(u, thread_id, at, k, *gateway_, seed)).dump();
  }

  std::string community_multiverse(const std::string& universe, std::uint64_t seed,
                                   std::int64_t created_at) {
    const auto u = parse_as<Universe>(universe);
    MultiverseOptions opts;
    opts.seed = seed;
    opts.created_at = at_seconds(created_at);
    py::gil_scoped_release release;
    return Json(multiverse_community(u.parent_community, u.design, u.config, *gateway_, opts)).dump();
  }

  std::string audit() const {
    Json out = Json::array();
    for (const auto& r : audit_->records()) out.push_back(to_json(r));
    return out.dump();
  }

 private:
  std::shared_ptr<AuditLog> audit_;
  std::shared_ptr<Gateway> gateway_;
};

}  // namespace

PYBIND11_MODULE(_simulacra, m) {
  m.doc() = "Simulated online communities from a design: goal, rules and seed personas.";

  static py::exception<Error> error_type(m, "SimulacraError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object instance = py::reinterpret_borrow<py::object>(error_type.ptr())(e.what());
      instance.attr("code") = std::string(error_code_name(e.code()));
      py::list violations;
      if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
        for (const auto& s : v->violations()) violations.append(s);
      }
      instance.attr("violations") = violations;
      PyErr_SetObject(error_type.ptr(), instance.ptr());
    }
  });

  m.def("validate_design", [](const std::string& design) {
    std::vector<std::string> violations;
    parse_design(parse(design), violations);
    return violations;
  });
  m.def("design_id", [](const std::string& design) { return design_id(design_from(design)); });

  m.def("headline_prompt",
        [](const std::string& persona, const std::string& design, const std::string& ablation) {
          return build_headline_prompt(Speaker::of(parse_as<Persona>(persona)), design_from(design),
                                       parse_ablation(ablation))
              .body;
        });
  m.def("reply_prompt", [](const std::string& persona, const std::string& utterances,
                           const std::string& design, const std::string& config) {
    const auto c = merge_config(GenerationConfig{}, parse(config));
    const auto us = parse_as<std::vector<Utterance>>(utterances);
    return build_reply_prompt(Speaker::of(parse_as<Persona>(persona)), us, design_from(design), c,
                              c.ablation)
        .body;
  });
  m.def("parse_completion", [](const std::string& raw) { return parse_completion(raw); });

  m.def("transcript", [](const std::string& thread) { return render_transcript(parse_as<Thread>(thread)); });
  m.def("make_pairs", [](const std::vector<std::pair<std::string, std::string>>& real,
                         const std::vector<std::pair<std::string, std::string>>& generated,
                         std::uint64_t seed) {
    const auto convert = [](const auto& in) {
      std::vector<Conversation> out;
      for (const auto& [source, text] : in) out.push_back({source, text});
      return out;
    };
    return pairs_to_json(make_pairs(convert(real), convert(generated), seed), seed).dump();
  });

  py::class_<Session>(m, "Session")
      .def(py::init<const std::string&>(), py::arg("backend") = "mock")
      .def("generate", &Session::generate, py::arg("design"), py::arg("config") = "{}",
           py::arg("created_at") = 0, py::arg("workers") = 1)
      .def("personas", &Session::personas, py::arg("design"), py::arg("count"),
           py::arg("seed") = 0, py::arg("temperature") = 0.7)
      .def("whatif", &Session::whatif, py::arg("universe"), py::arg("spec"), py::arg("seed"))
      .def("thread_multiverse", &Session::thread_multiverse, py::arg("universe"),
           py::arg("thread_id"), py::arg("at_utterance_index"), py::arg("alternatives"),
           py::arg("seed"))
      .def("community_multiverse", &Session::community_multiverse, py::arg("universe"),
           py::arg("seed"), py::arg("created_at") = 0)
      .def("audit", &Session::audit);

  py::class_<Store>(m, "Store")
      .def(py::init<std::string>(), py::arg("root"))
      .def("save_design", [](Store& s, const std::string& d) { return s.save_design(design_from(d)); })
      .def("load_design", [](const Store& s, const std::string& id) { return Json(s.load_design(id)).dump(); })
      .def("list_designs", &Store::list_designs)
      .def("save_universe",
           [](Store& s, const std::string& u) {
             const auto universe = parse_as<Universe>(u);
             s.save_universe(universe);
             return universe.id;
           })
      .def("load_universe",
           [](const Store& s, const std::string& id) { return Json(s.load_universe(id)).dump(); })
      .def("list_universes",
           [](const Store& s, const std::string& parent) {
             Json out = Json::array();
             for (const auto& summary : s.list_universes(parent)) out.push_back(to_json(summary));
             return out.dump();
           },
           py::arg("parent_community") = "")
      .def("append_threads",
           [](Store& s, const std::string& id, const std::string& threads) {
             s.append_threads(id, parse_as<std::vector<Thread>>(threads));
           })
      .def("load_branches", [](const Store& s, const std::string& id) {
        return Json(s.load_branches(id)).dump();
      });
}
