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

#include "simulacra/thread_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "simulacra/persona_expander.hpp"
#include "simulacra/prompt_forge.hpp"

namespace simulacra {

namespace {

constexpr std::string_view kPlaceholderDescription = "a member of this conversation";

// Who has spoken in a thread, and under which label. Under the no_personas
// ablation each participant is shown as "User N" in order of appearance.
class Cast {
 public:
  explicit Cast(bool numbered) : numbered_(numbered) {}

  void add(const Persona& p) {
    if (labels_.count(p.name())) return;
    participants_.push_back(p);
    if (!numbered_) {
      labels_.emplace(p.name(), p.name());
    } else if (is_user_label(p.name())) {
      // A participant carried over from a stored numbered thread.
      next_number_ = std::max(next_number_, std::stoul(p.name().substr(5)) + 1);
      labels_.emplace(p.name(), p.name());
    } else {
      labels_.emplace(p.name(), user_label(next_number_++));
    }
  }

  const std::string& label(const Persona& p) const { return labels_.at(p.name()); }

  Speaker speaker(const Persona& p) const {
    if (numbered_) return {Speaker::Kind::kNumbered, label(p), {}};
    return Speaker::of(p);
  }

  std::span<const Persona> participants() const { return participants_; }

 private:
  bool numbered_;
  std::size_t next_number_ = 1;
  std::vector<Persona> participants_;
  std::unordered_map<std::string, std::string> labels_;
};

bool numbered(const GenerationConfig& config) {
  return config.ablation == Ablation::kNoPersonas;
}

}  // namespace

std::string complete_utterance_text(const GenerationContext& ctx, const std::string& prompt,
                                    RngStream& rng, bool reply, ErrorCode failure) {
  for (std::size_t attempt = 0; attempt <= kEmptyResamples; ++attempt) {
    CompletionRequest request;
    request.prompt = prompt;
    request.temperature = ctx.temperature;
    request.max_tokens = kContentMaxTokens;
    request.stop = {std::string(kSpanClose)};
    request.seed = rng.next_u64();
    try {
      const auto result = ctx.gateway.complete(request, ctx.operation);
      return reply ? parse_reply_completion(result.text) : parse_completion(result.text);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyGeneration) throw;
    }
  }
  throw Error(failure, "completion stayed empty after " +
                           std::to_string(kEmptyResamples) + " resamples");
}

namespace {

void run_reply_loop(const GenerationContext& ctx, std::span<const Persona> roster,
                    Thread& thread, Cast& cast, std::string latest, RngStream& rng,
                    bool force_first_reply) {
  const auto& config = ctx.config;
  const double p = sample_reply_probability(rng, config);
  std::size_t replies = thread.size() - 1;
  bool forced = force_first_reply;
  while (replies < config.max_replies) {
    if (!forced && rng.uniform() >= p) break;
    forced = false;

    const auto choice = select_responder(roster, cast.participants(), latest, rng, config);
    cast.add(choice.persona);
    const auto prompt = build_reply_prompt(cast.speaker(choice.persona), thread.utterances(),
                                           ctx.design, config, config.ablation);
    auto text = complete_utterance_text(ctx, prompt.body, rng, true, ErrorCode::kGenerationFailed);
    const std::size_t index = thread.size();
    thread.append(Utterance(utterance_id(thread.id(), index), cast.label(choice.persona),
                            std::move(text), UtteranceKind::kReply, index));
    latest = choice.persona.name();
    ++replies;
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double sample_reply_probability(RngStream& rng, const GenerationConfig& config) {
  const double draw = rng.gaussian(config.reply_prob_mean, config.reply_prob_stdev);
  return std::clamp(draw, 0.0, 1.0);
}

ResponderChoice select_responder(std::span<const Persona> roster,
                                 std::span<const Persona> participants,
                                 std::string_view latest, RngStream& rng,
                                 const GenerationConfig& config) {
  if (roster.empty()) throw Error(ErrorCode::kPrecondition, "roster is empty");

  std::unordered_set<std::string_view> spoken;
  for (const auto& p : participants) spoken.insert(p.name());

  std::vector<const Persona*> fresh;
  for (const auto& p : roster) {
    if (!spoken.count(p.name()) && p.name() != latest) fresh.push_back(&p);
  }
  std::vector<const Persona*> returning;
  for (const auto& p : participants) {
    if (p.name() != latest) returning.push_back(&p);
  }

  auto branch = rng.bernoulli(config.new_persona_rate) ? ResponderBranch::kNew
                                                       : ResponderBranch::kExisting;
  if (branch == ResponderBranch::kNew && fresh.empty()) branch = ResponderBranch::kExisting;
  if (branch == ResponderBranch::kExisting && returning.empty()) branch = ResponderBranch::kNew;

  const auto& pool = branch == ResponderBranch::kNew ? fresh : returning;
  if (pool.empty()) {
    throw Error(ErrorCode::kNoCandidate, "no persona other than the latest speaker can reply");
  }
  return {*pool[rng.index(pool.size())], branch};
}

ThreadGenerationError::ThreadGenerationError(const Error& cause, std::optional<Thread> partial)
    : Error(cause.code(), cause.what()), partial_(std::move(partial)) {}

Utterance generate_post(const Persona& author, const GenerationContext& ctx, RngStream& rng,
                        std::string_view thread_id) {
  const bool use_labels = numbered(ctx.config);
  const Speaker speaker = use_labels ? Speaker::numbered(1) : Speaker::of(author);
  const auto prompt = build_headline_prompt(speaker, ctx.design, ctx.config.ablation, {},
                                            ctx.config.prompt_char_limit);
  auto text = complete_utterance_text(ctx, prompt.body, rng, false, ErrorCode::kPostGenerationFailed);
  return Utterance(utterance_id(thread_id, 0), speaker.label, std::move(text),
                   UtteranceKind::kPost, 0);
}

Thread generate_thread(const GenerationContext& ctx, std::span<const Persona> roster,
                       RngStream& rng, std::string thread_id) {
  if (roster.empty()) throw Error(ErrorCode::kPrecondition, "roster is empty");
  const Persona& poster = roster[rng.index(roster.size())];

  std::optional<Thread> thread;
  try {
    thread.emplace(thread_id, std::vector<Utterance>{generate_post(poster, ctx, rng, thread_id)});
    Cast cast(numbered(ctx.config));
    cast.add(poster);
    run_reply_loop(ctx, roster, *thread, cast, poster.name(), rng, false);
  } catch (const Error& e) {
    throw ThreadGenerationError(e, std::move(thread));
  }
  return std::move(*thread);
}

Thread continue_thread(const GenerationContext& ctx, std::span<const Persona> roster,
                       Thread base, RngStream& rng, bool force_first_reply) {
  Cast cast(numbered(ctx.config));
  std::string latest;
  for (const auto& u : base.utterances()) {
    latest = u.author();
    if (u.author() == kModeratorLabel) continue;
    const auto it = std::find_if(roster.begin(), roster.end(),
                                 [&](const Persona& p) { return p.name() == u.author(); });
    if (it != roster.end()) {
      cast.add(*it);
    } else {
      cast.add(Persona(u.author(), std::string(kPlaceholderDescription)));
    }
  }
  try {
    run_reply_loop(ctx, roster, base, cast, latest, rng, force_first_reply);
  } catch (const Error& e) {
    throw ThreadGenerationError(e, std::move(base));
  }
  return base;
}

UniverseGenerationError::UniverseGenerationError(const Error& cause, Universe partial)
    : Error(cause.code(), cause.what()), partial_(std::move(partial)) {}

std::string thread_id_for(std::string_view universe_id, std::size_t index) {
  return std::string(universe_id) + "-t" + std::to_string(index);
}

Universe generate_universe(const CommunityDesign& design, const GenerationConfig& config,
                           Gateway& gateway, const UniverseOptions& options) {
  require_valid(design);
  require_valid(config);
  const double temperature = options.temperature.value_or(config.temperature);

  Universe universe;
  universe.design = design;
  universe.config = config;
  universe.parent_community =
      options.parent_community.empty() ? design_id(design) : options.parent_community;
  universe.created_at = options.created_at;
  universe.id = "u-" + hex64(fnv1a64(Json(design).dump() + '\x1f' + Json(config).dump() +
                                     '\x1f' + universe.parent_community + '\x1f' +
                                     format_timestamp(options.created_at) + '\x1f' +
                                     format_double(temperature)));

  const std::size_t target = std::max(config.persona_pool_size, design.seed_personas.size());
  try {
    universe.roster = expand_personas(design.seed_personas, target, gateway,
                                      {temperature, derive_seed(config.rng_seed, fnv1a64("personas"))});
  } catch (const ExpansionStalled& e) {
    universe.roster = e.partial_roster();
    throw UniverseGenerationError(e, std::move(universe));
  } catch (const Error& e) {
    throw UniverseGenerationError(e, std::move(universe));
  }

  const std::size_t total = config.thread_count;
  std::vector<std::optional<Thread>> slots(total);
  std::mutex mu;
  std::size_t done = 0;
  std::size_t failed_index = total;
  std::exception_ptr failure;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  GenerationContext ctx{universe.design, universe.config, gateway, temperature, options.operation};
  const auto work = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      try {
        RngStream rng(derive_seed(config.rng_seed, i));
        auto thread = generate_thread(ctx, universe.roster, rng, thread_id_for(universe.id, i));
        std::lock_guard lock(mu);
        slots[i] = std::move(thread);
        ++done;
        if (options.on_progress) options.on_progress(done, total);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        stop = true;
        return;
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(total, 1));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  for (auto& slot : slots) {
    if (slot) universe.threads.push_back(std::move(*slot));
  }
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const Error& e) {
      throw UniverseGenerationError(e, std::move(universe));
    }
  }
  return universe;
}

}  // namespace simulacra
