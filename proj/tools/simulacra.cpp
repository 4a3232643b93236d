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

// Command-line front end. Exit codes: 0 success, 2 invalid input,
// 3 backend failure, 1 anything else.

#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include "simulacra/export.hpp"
#include "simulacra/gateway.hpp"
#include "simulacra/persona_expander.hpp"
#include "simulacra/scenario.hpp"
#include "simulacra/service.hpp"
#include "simulacra/store.hpp"
#include "simulacra/thread_engine.hpp"

namespace fs = std::filesystem;
using namespace simulacra;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitBackend = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation:
    case ErrorCode::kPrecondition:
    case ErrorCode::kInvalidSpec:
    case ErrorCode::kNotFound:
    case ErrorCode::kOversizedDesign:
    case ErrorCode::kBudgetExhausted:
    case ErrorCode::kNoCandidate:
      return kExitInvalid;
    case ErrorCode::kBackendUnavailable:
    case ErrorCode::kConfiguration:
    case ErrorCode::kEmptyGeneration:
    case ErrorCode::kExpansionStalled:
    case ErrorCode::kPostGenerationFailed:
    case ErrorCode::kGenerationFailed:
      return kExitBackend;
    default:
      return kExitOther;
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kValidation, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kValidation, path.string() + " is not valid JSON: " + e.what());
  }
}

CommunityDesign load_design_file(const fs::path& path) {
  std::vector<std::string> violations;
  auto design = parse_design(read_json(path), violations);
  if (!design || !violations.empty()) throw ValidationError(violations);
  return *design;
}

Universe load_universe_file(const fs::path& path) {
  try {
    return read_json(path).get<Universe>();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kValidation, path.string() + " is not a universe: " + e.what());
  }
}

struct BackendFlags {
  std::string backend;
  std::string audit;

  BackendFlags() {
    const char* env = std::getenv("SIMULACRA_BACKEND");
    backend = env && *env ? env : "live";
  }

  void add(CLI::App* cmd) {
    cmd->add_option("--backend", backend, "Completion backend (env SIMULACRA_BACKEND)")
        ->check(CLI::IsMember({"live", "mock"}))
        ->capture_default_str();
    cmd->add_option("--audit", audit, "Append every completion to this NDJSON file");
  }

  bool mock() const { return backend == "mock"; }

  std::shared_ptr<Gateway> gateway() const {
    auto log = audit.empty() ? std::make_shared<AuditLog>() : std::make_shared<AuditLog>(audit);
    if (mock()) return make_mock_gateway(log);
    auto config = BackendConfig::from_env();
    auto problems = validate_backend_config(config);
    if (config.api_key.empty() && config.endpoint_url == BackendConfig{}.endpoint_url) {
      problems.emplace_back("SIMULACRA_API_KEY is not set");
    }
    if (!problems.empty()) {
      std::string joined;
      for (const auto& p : problems) joined += (joined.empty() ? "" : "; ") + p;
      throw Error(ErrorCode::kConfiguration, "live backend: " + joined);
    }
    return std::make_shared<Gateway>(std::make_shared<HttpBackend>(config), config, log);
  }

  // Mock runs must be a pure function of their inputs, so they default to
  // a fixed creation time.
  Timestamp created_at(const std::string& flag) const {
    if (!flag.empty()) return parse_timestamp(flag);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
      return Timestamp(std::chrono::seconds(std::strtoll(epoch, nullptr, 10)));
    }
    return mock() ? Timestamp{} : now_seconds();
  }
};

// ----------------------------------------------------------------- generate

struct GenerateArgs {
  std::string design;
  std::string ablation;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> pool;
  std::string config;
  std::string out;
  std::string timestamp;
  std::size_t workers = 1;
  BackendFlags backend;
};

int run_generate(const GenerateArgs& a) {
  const auto design = load_design_file(a.design);
  Json overrides = a.config.empty() ? Json::object() : read_json(a.config);
  if (!a.ablation.empty()) overrides["ablation"] = a.ablation;
  if (a.seed) overrides["rng_seed"] = *a.seed;
  if (a.threads) overrides["thread_count"] = *a.threads;
  if (a.pool) overrides["persona_pool_size"] = *a.pool;
  const auto config = merge_config(GenerationConfig{}, overrides);

  auto gateway = a.backend.gateway();
  UniverseOptions opts;
  opts.created_at = a.backend.created_at(a.timestamp);
  opts.workers = a.workers;
  if (::isatty(2)) opts.on_progress = [](std::size_t done, std::size_t total) {
    std::cerr << "\rthreads " << done << "/" << total << std::flush;
    if (done == total) std::cerr << "\n";
  };
  const auto universe = generate_universe(design, config, *gateway, opts);

  const fs::path out(a.out);
  write_text(out / "universe.json", Json(universe).dump(2) + "\n");
  for (const auto& t : universe.threads) {
    write_text(out / "transcripts" / (t.id() + ".txt"), render_transcript(t) + "\n");
  }
  std::cout << universe.id << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- personas

struct PersonasArgs {
  std::string design;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  double temperature = 0.7;
  BackendFlags backend;
};

int run_personas(const PersonasArgs& a) {
  const auto design = load_design_file(a.design);
  auto gateway = a.backend.gateway();
  const auto roster = expand_personas(design.seed_personas,
                                      std::max(a.count, design.seed_personas.size()), *gateway,
                                      {a.temperature, a.seed});
  for (const auto& p : roster) std::cout << p.name() << ", " << p.description() << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- whatif

struct WhatIfArgs {
  std::string universe;
  std::string thread;
  std::size_t at = 0;
  std::string persona;
  std::string title;
  std::string intervene;
  std::size_t k = 3;
  std::uint64_t seed = 0;
  std::string out;
  bool transcript = false;
  BackendFlags backend;
};

int run_whatif(const WhatIfArgs& a) {
  const auto universe = load_universe_file(a.universe);
  WhatIfSpec spec;
  spec.thread_id = a.thread;
  spec.at_utterance_index = a.at;
  spec.alternatives = a.k;
  if (!a.persona.empty()) spec.injected_persona = parse_injected_persona(a.persona);
  if (!a.title.empty()) spec.title_override = a.title;
  if (!a.intervene.empty()) spec.intervention_text = a.intervene;

  auto gateway = a.backend.gateway();
  const auto result = spec.intervention_text ? whatif_intervention(universe, spec, *gateway, a.seed)
                                             : whatif_reply(universe, spec, *gateway, a.seed);
  for (const auto& f : result.failures) {
    std::cerr << "alternative " << f.branch_index << " failed: " << f.message << "\n";
  }
  std::string text;
  if (a.transcript) {
    for (const auto& t : result.threads) text += "== " + t.id() + "\n" + render_transcript(t) + "\n\n";
  } else {
    text = to_json(result).dump(2) + "\n";
  }
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text(a.out, text);
  }
  return kExitOk;
}

// ------------------------------------------------------------- export-pairs

struct ExportArgs {
  std::string universe;
  std::string real;
  std::string out;
  std::uint64_t seed = 0;
};

int run_export(const ExportArgs& a) {
  const auto universe = load_universe_file(a.universe);
  if (!fs::is_directory(a.real)) throw Error(ErrorCode::kValidation, a.real + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(a.real)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<Conversation> real;
  for (const auto& f : files) {
    real.push_back({f.filename().string(), std::string(trim(read_text(f)))});
  }
  std::vector<Conversation> generated;
  for (const auto& t : universe.threads) generated.push_back({t.id(), render_transcript(t)});

  const auto pairs = make_pairs(real, generated, a.seed);
  write_text(a.out, pairs_to_json(pairs, a.seed).dump(2) + "\n");
  std::cerr << pairs.size() << " pairs\n";
  return kExitOk;
}

// -------------------------------------------------------------------- serve

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
  std::size_t max_jobs = 1;
  std::size_t workers = 1;
  BackendFlags backend;
};

HttpServer* g_server = nullptr;

int run_serve(ServeArgs a) {
  Store store = a.data_dir.empty() ? Store::from_env() : Store(a.data_dir);
  if (a.backend.audit.empty()) a.backend.audit = store.audit_path().string();
  auto options = ServiceOptions::from_env();
  options.max_concurrent_jobs = a.max_jobs;
  options.generation_workers = a.workers;
  Service service(store, a.backend.gateway(), options);
  HttpServer server(service);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  std::cerr << "serving " << store.root().string() << " on http://" << a.host << ":" << a.port
            << "\n";
  server.run(a.host, a.port);
  g_server = nullptr;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Populate a community design with generated conversations."};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate a universe from a design file");
  generate->add_option("--design", gen.design, "Community design JSON")->required()->check(CLI::ExistingFile);
  generate->add_option("--ablation", gen.ablation, "Prompt ablation")
      ->check(CLI::IsMember({"full", "no-description", "no-personas", "no_description", "no_personas"}));
  generate->add_option("--seed", gen.seed, "RNG seed");
  generate->add_option("--threads", gen.threads, "Number of threads");
  generate->add_option("--pool", gen.pool, "Persona pool size");
  generate->add_option("--config", gen.config, "JSON file of GenerationConfig overrides")
      ->check(CLI::ExistingFile);
  generate->add_option("--timestamp", gen.timestamp, "Creation time, YYYY-MM-DDTHH:MM:SSZ");
  generate->add_option("--workers", gen.workers, "Threads generated concurrently")->check(CLI::PositiveNumber);
  generate->add_option("--out", gen.out, "Output directory")->required();
  gen.backend.add(generate);

  PersonasArgs per;
  auto* personas = app.add_subcommand("personas", "Expand seed personas into a roster");
  personas->add_option("--design", per.design, "Community design JSON")->required()->check(CLI::ExistingFile);
  personas->add_option("--count", per.count, "Roster size")->required();
  personas->add_option("--seed", per.seed, "RNG seed");
  personas->add_option("--temperature", per.temperature, "Sampling temperature")->capture_default_str();
  per.backend.add(personas);

  WhatIfArgs wi;
  auto* whatif = app.add_subcommand("whatif", "Re-generate a thread from one of its utterances");
  whatif->add_option("--universe", wi.universe, "Universe JSON")->required()->check(CLI::ExistingFile);
  whatif->add_option("--thread", wi.thread, "Thread id")->required();
  whatif->add_option("--at", wi.at, "Utterance index")->required();
  whatif->add_option("--persona", wi.persona, "Injected persona, \"Label:description\"");
  whatif->add_option("--title", wi.title, "Title attribute for the reply cue");
  whatif->add_option("--intervene", wi.intervene, "Moderator intervention text");
  whatif->add_option("-k,--alternatives", wi.k, "Alternatives")->capture_default_str();
  whatif->add_option("--seed", wi.seed, "RNG seed");
  whatif->add_option("--out", wi.out, "Output file (default stdout)");
  whatif->add_flag("--transcript", wi.transcript, "Print transcripts instead of JSON");
  wi.backend.add(whatif);

  ExportArgs ex;
  auto* export_pairs = app.add_subcommand("export-pairs", "Pair real and generated conversations");
  export_pairs->add_option("--universe", ex.universe, "Universe JSON")->required()->check(CLI::ExistingFile);
  export_pairs->add_option("--real", ex.real, "Directory of real transcripts (*.txt)")->required();
  export_pairs->add_option("--out", ex.out, "Output JSON")->required();
  export_pairs->add_option("--seed", ex.seed, "Shuffle seed");

  ServeArgs sv;
  if (const char* port = std::getenv("SIMULACRA_PORT"); port && *port) sv.port = std::atoi(port);
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--host", sv.host, "Bind address")->capture_default_str();
  serve->add_option("--port", sv.port, "Port (env SIMULACRA_PORT)")->capture_default_str();
  serve->add_option("--data-dir", sv.data_dir, "Store root (env SIMULACRA_DATA_DIR)");
  serve->add_option("--max-jobs", sv.max_jobs, "Concurrent generation jobs")->check(CLI::PositiveNumber);
  serve->add_option("--workers", sv.workers, "Threads per generation")->check(CLI::PositiveNumber);
  sv.backend.add(serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*personas) return run_personas(per);
    if (*whatif) return run_whatif(wi);
    if (*export_pairs) return run_export(ex);
    if (*serve) return run_serve(sv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const Error& e) {
    std::cerr << "error (" << error_code_name(e.code()) << "): " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}
