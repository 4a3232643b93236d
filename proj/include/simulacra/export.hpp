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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "simulacra/model.hpp"

namespace simulacra {

/// "[Name]: text" per utterance, newline-separated, no trailing newline.
std::string render_transcript(const Thread& thread);

struct Conversation {
  std::string source;  // file name or thread id
  std::string text;
};

enum class Side { kLeft, kRight };

struct ConversationPair {
  std::size_t index = 0;
  Conversation left;
  Conversation right;
  Side real_side = Side::kLeft;
};

/// Pairs real[i] with generated[i] for i < min(sizes), shuffles the pair
/// order (Fisher-Yates, j = index(i + 1) for i from n-1 down to 1) and then
/// flips one coin per pair, in shuffled order, to put the real one left.
std::vector<ConversationPair> make_pairs(const std::vector<Conversation>& real,
                                         const std::vector<Conversation>& generated,
                                         std::uint64_t seed);

/// {"seed", "pairs": [{index, left, right}], "answer_key": [{index,
/// real_side, real_source, generated_source}]}.
Json pairs_to_json(const std::vector<ConversationPair>& pairs, std::uint64_t seed);

}  // namespace simulacra
