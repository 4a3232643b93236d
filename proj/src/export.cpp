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

#include "simulacra/export.hpp"

#include <algorithm>
#include <numeric>

#include "simulacra/rng.hpp"

namespace simulacra {

std::string render_transcript(const Thread& thread) {
  std::string out;
  for (const auto& u : thread.utterances()) {
    if (!out.empty()) out += '\n';
    out += "[" + u.author() + "]: " + u.text();
  }
  return out;
}

std::vector<ConversationPair> make_pairs(const std::vector<Conversation>& real,
                                         const std::vector<Conversation>& generated,
                                         std::uint64_t seed) {
  const std::size_t n = std::min(real.size(), generated.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(seed);
  for (std::size_t i = n; i-- > 1;) std::swap(order[i], order[rng.index(i + 1)]);

  std::vector<ConversationPair> pairs;
  pairs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& r = real[order[k]];
    const auto& g = generated[order[k]];
    const bool real_left = rng.bernoulli(0.5);
    pairs.push_back({k, real_left ? r : g, real_left ? g : r, real_left ? Side::kLeft : Side::kRight});
  }
  return pairs;
}

Json pairs_to_json(const std::vector<ConversationPair>& pairs, std::uint64_t seed) {
  Json list = Json::array();
  Json key = Json::array();
  for (const auto& p : pairs) {
    list.push_back({{"index", p.index}, {"left", p.left.text}, {"right", p.right.text}});
    const bool left = p.real_side == Side::kLeft;
    key.push_back({{"index", p.index},
                   {"real_side", left ? "left" : "right"},
                   {"real_source", left ? p.left.source : p.right.source},
                   {"generated_source", left ? p.right.source : p.left.source}});
  }
  return {{"seed", seed}, {"pairs", list}, {"answer_key", key}};
}

}  // namespace simulacra
