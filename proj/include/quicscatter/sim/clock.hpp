// Copyright 2026 The quicscatter Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

namespace quicscatter::sim {

// Event-driven simulation time. Events at equal times run in scheduling
// order, so a scenario replays identically for a given seed.
class VirtualClock {
 public:
  double now() const { return now_; }
  size_t pending() const { return queue_.size(); }

  // Times in the past are clamped to now().
  void schedule_at(double time, std::function<void()> action);
  void schedule_in(double delay, std::function<void()> action) { schedule_at(now_ + delay, std::move(action)); }

  // Runs every event with time <= `until`, then sets now() to `until`.
  void run_until(double until);
  // Runs events strictly before `until`; now() ends at `until`.
  void run_before(double until);

 private:
  struct Event {
    double time;
    uint64_t seq;
    std::function<void()> action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  template <typename Pred>
  void drain(Pred due, double until);

  double now_ = 0.0;
  uint64_t next_seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

}  // namespace quicscatter::sim
