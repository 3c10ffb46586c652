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

#include "procwriter/types.hpp"

#include "procwriter/error.hpp"
#include "procwriter/text.hpp"

namespace procwriter {

Process::Process(std::string title) : title_(std::move(title)) {
  if (trim(title_).empty()) throw InvalidArgument("process title is blank");
}

SubEvent::SubEvent(std::string text) : text_(std::move(text)) {
  if (trim(text_).empty()) throw InvalidArgument("sub-event text is blank");
  if (is_stop_literal(text_))
    throw InvalidArgument("sub-event text is the reserved stop literal '" +
                          std::string(kStopLiteral) + "'");
}

SubEventSequence SubEventSequence::from_texts(const std::vector<std::string>& texts) {
  std::vector<SubEvent> events;
  events.reserve(texts.size());
  for (const auto& t : texts) events.emplace_back(t);
  return SubEventSequence(std::move(events));
}

std::vector<std::string> SubEventSequence::texts() const {
  std::vector<std::string> out;
  out.reserve(events_.size());
  for (const auto& e : events_) out.push_back(e.text());
  return out;
}

void SubEventSequence::insert(std::size_t pos, SubEvent e) {
  if (pos > events_.size()) throw InvalidArgument("insert position out of range");
  events_.insert(events_.begin() + static_cast<std::ptrdiff_t>(pos), std::move(e));
}

ProcessExample::ProcessExample(Process process, std::vector<SubEventSequence> references)
    : process_(std::move(process)), references_(std::move(references)) {
  if (references_.empty())
    throw InvalidArgument("process '" + process_.title() + "' has no references");
  for (std::size_t i = 0; i < references_.size(); ++i) {
    if (references_[i].empty())
      throw InvalidArgument("process '" + process_.title() + "': reference " +
                            std::to_string(i) + " is empty");
  }
}

}  // namespace procwriter
