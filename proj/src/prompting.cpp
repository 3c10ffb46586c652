// Copyright 2026 The Procwriter Authors.
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

#include "procwriter/prompting.hpp"

#include <cctype>

#include "procwriter/error.hpp"

namespace procwriter {

std::string PromptTemplate::step_label(std::size_t index) const {
  return step_prefix + std::to_string(index) + step_separator;
}

namespace {

template <typename Steps>
std::string render(const std::string& title, const Steps& steps, std::size_t count,
                   const PromptTemplate& tmpl) {
  std::string out = tmpl.question_prefix + title + tmpl.question_suffix;
  for (std::size_t i = 0; i < count; ++i) {
    out += ' ';
    out += tmpl.step_label(i + 1);
    out += steps(i);
  }
  return out;
}

// " Step <digits>: " anywhere in `s`.
bool contains_step_label(std::string_view s, const PromptTemplate& tmpl) {
  const std::string head = " " + tmpl.step_prefix;
  for (std::size_t at = s.find(head); at != std::string_view::npos; at = s.find(head, at + 1)) {
    std::size_t i = at + head.size();
    std::size_t digits = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
    if (digits > 0 && s.substr(i).starts_with(tmpl.step_separator)) return true;
  }
  return false;
}

}  // namespace

std::string render_prompt(const Process& process, std::span<const SubEvent> prior,
                          const PromptTemplate& tmpl) {
  std::string out = render(
      process.title(), [&](std::size_t i) -> const std::string& { return prior[i].text(); },
      prior.size(), tmpl);
  out += ' ';
  out += tmpl.step_label(prior.size() + 1);
  out += tmpl.mask;
  return out;
}

std::string render_coherence_text(const Process& process, std::span<const SubEvent> steps,
                                  const PromptTemplate& tmpl) {
  if (steps.empty()) throw InvalidArgument("coherence text needs at least one step");
  return render(
      process.title(), [&](std::size_t i) -> const std::string& { return steps[i].text(); },
      steps.size(), tmpl);
}

std::string render_coherence_text(const Process& process, std::span<const SubEvent> prior,
                                  std::string_view candidate, const PromptTemplate& tmpl) {
  std::string out = render(
      process.title(), [&](std::size_t i) -> const std::string& { return prior[i].text(); },
      prior.size(), tmpl);
  out += ' ';
  out += tmpl.step_label(prior.size() + 1);
  out += candidate;
  return out;
}

std::vector<TrainingPair> expand_training_pairs(const ProcessExample& example,
                                                const PromptTemplate& tmpl) {
  std::vector<TrainingPair> pairs;
  for (const auto& ref : example.references()) {
    auto events = ref.events();
    for (std::size_t i = 0; i <= events.size(); ++i) {
      pairs.push_back({render_prompt(example.process(), events.first(i), tmpl),
                       i < events.size() ? events[i].text() : tmpl.stop_literal});
    }
  }
  return pairs;
}

ParsedPrompt parse_prompt(std::string_view text, const PromptTemplate& tmpl) {
  if (!text.starts_with(tmpl.question_prefix))
    throw ParseError("prompt does not start with '" + tmpl.question_prefix + "'");
  std::string_view rest = text.substr(tmpl.question_prefix.size());

  ParsedPrompt parsed;
  const std::string first = tmpl.question_suffix + " " + tmpl.step_label(1);
  std::size_t pos = rest.find(first);
  if (pos == std::string_view::npos) {
    // Bare question "How to {title}?"
    if (!rest.ends_with(tmpl.question_suffix))
      throw ParseError("prompt has neither steps nor a trailing '" + tmpl.question_suffix + "'");
    parsed.title = std::string(rest.substr(0, rest.size() - tmpl.question_suffix.size()));
    if (trim(parsed.title).empty()) throw ParseError("prompt has an empty title");
    return parsed;
  }
  parsed.title = std::string(rest.substr(0, pos));
  if (trim(parsed.title).empty()) throw ParseError("prompt has an empty title");
  rest = rest.substr(pos + first.size());

  std::vector<std::string> segments;
  for (std::size_t next = 2;; ++next) {
    const std::string label = " " + tmpl.step_label(next);
    std::size_t at = rest.find(label);
    if (at == std::string_view::npos) {
      segments.emplace_back(rest);
      break;
    }
    segments.emplace_back(rest.substr(0, at));
    rest = rest.substr(at + label.size());
  }

  if (segments.back() == tmpl.mask) {
    parsed.has_mask = true;
    segments.pop_back();
  }
  for (const auto& s : segments) {
    if (contains_step_label(s, tmpl))
      throw ParseError("step text contains a step label and cannot be parsed unambiguously: '" +
                       s + "'");
  }
  parsed.steps = std::move(segments);
  return parsed;
}

}  // namespace procwriter
