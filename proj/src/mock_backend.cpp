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

#include <array>
#include <cctype>
#include <cstdio>
#include <set>
#include <sstream>

#include "simulacra/gateway.hpp"
#include "simulacra/rng.hpp"

namespace simulacra {

namespace {

// Sentence corpus. "{topic}" is replaced by the community goal recovered
// from the prompt; templates without it are used when the prompt carries
// no goal (the no_description ablation).

constexpr std::array kHeadlines = {
    "Does anyone here have advice about {topic}? I'm new and would love to hear your experiences.",
    "My experience with {topic} has been amazing and I would encourage everyone to give it a try!",
    "I've been thinking a lot about {topic} lately and I'm not sure where to start.",
    "What is the one thing you wish someone had told you earlier about {topic}?",
    "Hot take: most of the advice you read online about {topic} is outdated.",
    "Finally worked up the courage to post here. Here's my story with {topic}.",
    "Can we talk about how hard it is to find good resources on {topic}?",
    "Weekly check-in: how is everyone doing with {topic} this week?",
    "I made a beginner's guide to {topic}, feedback welcome.",
    "Is it just me or has the conversation around {topic} changed a lot recently?",
};

constexpr std::array kTopiclessHeadlines = {
    "What happens when you let a bunch of children run a country?",
    "I'm considering a career in web development. What are the pros and cons?",
    "Looking for a fun and unique way to celebrate your next birthday?",
    "Just got back from the best vacation of my life, ask me anything.",
    "Does anyone else feel like the weeks are getting shorter?",
    "What's a small purchase that made a big difference in your life?",
};

constexpr std::array kReplies = {
    "I'm sorry to hear that you felt that way. I think it can be really helpful to talk to others about {topic}.",
    "Thanks for sharing this. I had a very similar experience with {topic} last year.",
    "I respectfully disagree. In my experience {topic} is more complicated than that.",
    "This is great advice, I wish I had read something like this when I started with {topic}.",
    "Could you say a bit more about what worked for you? I'm still figuring out {topic}.",
    "Honestly this is one of the most useful posts I've seen here about {topic}.",
    "I think it depends a lot on the person, but I agree with most of what you said.",
    "Have you tried asking in the weekly thread? People there know a lot about {topic}.",
    "Same here. It took me a long time to feel comfortable with {topic}.",
    "That's a fair point, although I'd add that patience matters more than anything.",
    "I've been lurking for a while and this finally convinced me to comment. Great thread.",
    "Not sure I agree, but I appreciate you taking the time to write this out.",
};

constexpr std::array kTopiclessReplies = {
    "Yeah, I've noticed that too.",
    "That's interesting, I never thought about it that way.",
    "Lol same. Happens to me every time.",
    "I don't really get what you mean, can you explain?",
    "Good for you, honestly.",
};

constexpr std::array kTrollReplies = {
    "Antidepressants are the work of the devil and anyone who takes them is a pathetic coward.",
    "You're kidding, right? Nobody here is going to take you seriously.",
    "Wow, imagine needing strangers on the internet to tell you that.",
    "This is the dumbest thing I've read all week, and I've read a lot.",
    "All you need to do is try harder. If you can't, then you're just not meant for this.",
    "Cry more. Nobody asked.",
};

// Responses to a moderator intervention: back down, escalate, deflect.
constexpr std::array kApologies = {
    "Sorry, I may have been too harsh.",
    "Fair enough, I didn't mean it to come across that way. My apologies.",
    "You're right, that was out of line. I'll keep it civil.",
};
constexpr std::array kEscalations = {
    "That's offensive? Then why don't you kick me out already? I'd like to see you do it LOL",
    "Oh great, the fun police showed up. Ban me if you're so upset.",
    "Typical mods, silencing anyone with an actual opinion.",
};
constexpr std::array kDeflections = {
    "Whatever, I was just saying what everyone else is thinking.",
    "I was only joking, people here are way too sensitive.",
    "Fine. Didn't realize this place was so serious.",
};

constexpr std::array kGeneric = {
    "I'm considering a career in web development. What are the pros and cons?",
    "Looking for a fun and unique way to celebrate your next birthday? Why not try a birthday photoshoot!",
    "Some days are better than others, and that's okay.",
    "Just finished a great book and I can't stop thinking about it.",
};

constexpr std::array kFirstNames = {
    "Aaliyah", "Aarav", "Abigail", "Adrian", "Aiko", "Alejandro", "Amara", "Amir",
    "Ana", "Andre", "Anika", "Arjun", "Astrid", "Beatriz", "Benjamin", "Bilal",
    "Bruno", "Camila", "Carlos", "Chen", "Chloe", "Dante", "Daria", "David",
    "Diego", "Elena", "Elif", "Emeka", "Emma", "Farah", "Felix", "Fatima",
    "Gabriel", "Grace", "Hana", "Hassan", "Ines", "Isaac", "Ivan", "Jamal",
    "Jasmine", "Javier", "Jin", "Julia", "Kai", "Kenji", "Kofi", "Lara",
    "Leo", "Lina", "Lucas", "Maddie", "Malik", "Maria", "Mateo", "Maya",
    "Mei", "Nadia", "Naomi", "Nikhil", "Noah", "Olga", "Omar", "Priya",
    "Rafael", "Rania", "Ravi", "Rosa", "Samir", "Sara", "Sofia", "Tariq",
    "Tomas", "Uma", "Victor", "Wei", "Yara", "Yusuf", "Zara", "Zoe",
};

constexpr std::array kLastNames = {
    "Abbott", "Adeyemi", "Alvarez", "Andersen", "Bakker", "Banerjee", "Barros", "Becker",
    "Bianchi", "Brennan", "Castillo", "Chandra", "Chang", "Cohen", "Costa", "Dubois",
    "Duarte", "Eriksen", "Farouk", "Fischer", "Fontaine", "Garcia", "Green", "Gupta",
    "Haddad", "Hansen", "Herrera", "Hoffman", "Ibrahim", "Ito", "Jensen", "Johansson",
    "Kamau", "Kaur", "Kim", "Kowalski", "Kumar", "Larsen", "Laurent", "Lee",
    "Lopez", "Mahmoud", "Martin", "Mendes", "Moreau", "Morales", "Murphy", "Nakamura",
    "Nguyen", "Novak", "Okafor", "Oliveira", "Osei", "Park", "Patel", "Petrov",
    "Quinn", "Ramos", "Reyes", "Rossi", "Sato", "Schmidt", "Silva", "Singh",
    "Sousa", "Suzuki", "Tanaka", "Torres", "Tran", "Varga", "Vasquez", "Wagner",
    "Walsh", "Wang", "Weber", "Yamamura", "Yilmaz", "Young", "Zhang", "Zimmerman",
};

constexpr std::array kRoles = {
    "graduate student", "retired teacher", "software engineer", "journalist",
    "nurse", "small business owner", "college freshman", "researcher",
    "stay-at-home parent", "librarian", "consultant", "volunteer organizer",
    "professor", "freelance writer", "policy analyst", "high school student",
};

constexpr std::array kPersonaTemplates = {
    "{role} with a focus on {kw}",
    "{role} who follows {kw} closely",
    "{role}, interested in {kw}",
    "aspiring {role} passionate about {kw}",
    "{role} who often argues about {kw}",
    "former {role}, curious about {kw}",
};

const std::set<std::string> kStopWords = {
    "about", "after", "again", "being", "could", "every", "from", "have",
    "into", "like", "likes", "more", "often", "other", "that", "their",
    "there", "these", "they", "this", "with", "works", "would", "your",
};

template <typename Array>
std::string pick(const Array& a, RngStream& rng) {
  return std::string(a[rng.index(a.size())]);
}

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  for (auto pos = text.find(from); pos != std::string::npos;
       pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
  return text;
}

std::string between(std::string_view text, std::string_view open, std::string_view close) {
  const auto start = text.rfind(open);
  if (start == std::string_view::npos) return {};
  const auto from = start + open.size();
  const auto end = text.find(close, from);
  if (end == std::string_view::npos) return {};
  return std::string(text.substr(from, end - from));
}

std::string fill_topic(std::string_view sentence, const std::string& topic) {
  return replace_all(std::string(sentence), "{topic}", topic);
}

std::vector<std::string> content_words(std::string_view prompt) {
  std::vector<std::string> words;
  std::istringstream lines{std::string(prompt)};
  std::string line;
  while (std::getline(lines, line)) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    std::istringstream ws(line.substr(comma + 1));
    std::string w;
    while (ws >> w) {
      while (!w.empty() && !std::isalpha(static_cast<unsigned char>(w.back()))) w.pop_back();
      if (w.size() >= 4 && !kStopWords.count(to_lower_ascii(w))) words.push_back(w);
    }
  }
  return words;
}

std::string persona_lines(std::string_view prompt, RngStream& rng) {
  auto words = content_words(prompt);
  if (words.empty()) words = {"community life", "current events", "local news"};
  const std::size_t count = 5 + rng.index(4);
  std::string out;
  for (std::size_t i = 0; i < count; ++i) {
    std::string description = pick(kPersonaTemplates, rng);
    std::string kw = words[rng.index(words.size())];
    if (rng.bernoulli(0.5)) {
      const auto& second = words[rng.index(words.size())];
      if (second != kw) kw += " " + second;
    }
    description = replace_all(description, "{role}", pick(kRoles, rng));
    description = replace_all(description, "{kw}", to_lower_ascii(kw));
    out += pick(kFirstNames, rng) + " " + pick(kLastNames, rng) + ", " + description + "\n";
  }
  return out;
}

std::string reply_body(std::string_view prompt, RngStream& rng) {
  const auto cue = prompt.rfind("[");
  const std::string cue_line = cue == std::string_view::npos ? std::string() : std::string(prompt.substr(cue));
  const std::string title = between(cue_line, "title=\"", "\"");

  // Is the latest thread utterance a moderator intervention?
  const std::string marker = "]: <span class=\"comment\">";
  const auto thread_start = prompt.find("Thread:");
  const auto last_comment = prompt.rfind(marker);
  if (thread_start != std::string_view::npos && last_comment != std::string_view::npos &&
      last_comment > thread_start) {
    const auto open = prompt.rfind('[', last_comment);
    if (open != std::string_view::npos &&
        prompt.substr(open + 1, last_comment - open - 1) == kModeratorLabel) {
      switch (rng.index(3)) {
        case 0: return pick(kApologies, rng);
        case 1: return pick(kEscalations, rng);
        default: return pick(kDeflections, rng);
      }
    }
  }

  for (auto pos = title.find("troll"); pos != std::string::npos;
       pos = title.find("troll", pos + 1)) {
    // "NOT trolling" is a community rule, not a trolling persona.
    if (pos < 4 || title.compare(pos - 4, 4, "NOT ") != 0) return pick(kTrollReplies, rng);
  }

  const std::string topic = between(prompt, "online social media for ", ".\nThread:");
  if (topic.empty()) return pick(kTopiclessReplies, rng);
  return fill_topic(pick(kReplies, rng), topic);
}

std::string headline_body(std::string_view prompt, RngStream& rng) {
  const std::string topic = between(prompt, "online forum for ", ": <span");
  if (topic.empty()) return pick(kTopiclessHeadlines, rng);
  return fill_topic(pick(kHeadlines, rng), topic);
}

}  // namespace

MockBackend::PromptClass MockBackend::classify(std::string_view prompt) {
  if (prompt.find("Current responder:") != std::string_view::npos) return PromptClass::kReply;
  if (prompt.find("class=\"headline_reddit\"") != std::string_view::npos) {
    return PromptClass::kHeadline;
  }
  if (!prompt.empty() && prompt.back() == '\n' && prompt.find('<') == std::string_view::npos) {
    std::istringstream lines{std::string(prompt)};
    std::string line;
    bool any = false;
    bool all = true;
    while (std::getline(lines, line)) {
      if (trim(line).empty()) continue;
      any = true;
      if (line.find(',') == std::string::npos) all = false;
    }
    if (any && all) return PromptClass::kPersonaExpansion;
  }
  return PromptClass::kGeneric;
}

std::uint64_t MockBackend::request_hash(const CompletionRequest& request) {
  char temp[32];
  std::snprintf(temp, sizeof temp, "%.6f", request.temperature);
  std::string key = request.prompt;
  key += '\x1f';
  key += temp;
  for (const auto& s : request.stop) {
    key += '\x1f';
    key += s;
  }
  key += '\x1f';
  if (request.seed) key += std::to_string(*request.seed);
  return fnv1a64(key);
}

CompletionResult MockBackend::complete(const CompletionRequest& request) {
  RngStream rng(request_hash(request));
  std::string raw;
  switch (classify(request.prompt)) {
    case PromptClass::kPersonaExpansion:
      raw = persona_lines(request.prompt, rng) + "\nThese are some of the members.";
      break;
    case PromptClass::kHeadline:
      raw = headline_body(request.prompt, rng) + "</span>\n\n" + pick(kFirstNames, rng) +
            " posted the following headline";
      break;
    case PromptClass::kReply:
      // The reply cue opens a quote, so the body closes it before the tag.
      raw = reply_body(request.prompt, rng) + "\"</span>\n[" + pick(kFirstNames, rng) +
            "]: <span class=\"comment\">";
      break;
    case PromptClass::kGeneric:
      raw = pick(kGeneric, rng) + "</span>\n\n";
      break;
  }

  CompletionResult result;
  result.text = std::move(raw);
  if (scrub_stop_strings(result.text, request.stop)) {
    result.finish_reason = FinishReason::kStopSequence;
  } else if (request.max_tokens > 0 && char_length(result.text) > request.max_tokens * 4) {
    result.text.resize(request.max_tokens * 4);
    result.finish_reason = FinishReason::kLength;
  } else {
    result.finish_reason = FinishReason::kOther;
  }
  return result;
}

}  // namespace simulacra
