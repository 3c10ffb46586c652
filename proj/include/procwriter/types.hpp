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

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace procwriter {

// The process title S, e.g. "make a chocolate cake".
class Process {
 public:
  // Throws InvalidArgument if the title is blank.
  explicit Process(std::string title);

  const std::string& title() const { return title_; }

  friend bool operator==(const Process&, const Process&) = default;

 private:
  std::string title_;
};

// One step of a process. Never blank and never the stop literal.
class SubEvent {
 public:
  explicit SubEvent(std::string text);

  const std::string& text() const { return text_; }

  friend bool operator==(const SubEvent&, const SubEvent&) = default;

 private:
  std::string text_;
};

// Temporally ordered steps. May be empty (a decode can stop immediately).
class SubEventSequence {
 public:
  SubEventSequence() = default;
  explicit SubEventSequence(std::vector<SubEvent> events)
      : events_(std::move(events)) {}

  // Validates every text as a SubEvent.
  static SubEventSequence from_texts(const std::vector<std::string>& texts);

  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const SubEvent& operator[](std::size_t i) const { return events_[i]; }
  auto begin() const { return events_.begin(); }
  auto end() const { return events_.end(); }

  std::span<const SubEvent> events() const { return events_; }
  std::vector<std::string> texts() const;

  void push_back(SubEvent e) { events_.push_back(std::move(e)); }
  void insert(std::size_t pos, SubEvent e);

  friend bool operator==(const SubEventSequence&,
                         const SubEventSequence&) = default;

 private:
  std::vector<SubEvent> events_;
};

// A process with one or more non-empty reference sequences.
class ProcessExample {
 public:
  ProcessExample(Process process, std::vector<SubEventSequence> references);

  const Process& process() const { return process_; }
  const std::vector<SubEventSequence>& references() const {
    return references_;
  }

  friend bool operator==(const ProcessExample&,
                         const ProcessExample&) = default;

 private:
  Process process_;
  std::vector<SubEventSequence> references_;
};

struct DatasetSplit {
  std::string name;
  std::vector<ProcessExample> examples;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }

  friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

}  // namespace procwriter
