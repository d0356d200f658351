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

#include "quicscatter/sim/clock.hpp"

#include <algorithm>

namespace quicscatter::sim {

void VirtualClock::schedule_at(double time, std::function<void()> action) {
  queue_.push(Event{std::max(time, now_), next_seq_++, std::move(action)});
}

template <typename Pred>
void VirtualClock::drain(Pred due, double until) {
  while (!queue_.empty() && due(queue_.top().time)) {
    // Copy out before pop: the action may schedule more events.
    Event event = queue_.top();
    queue_.pop();
    now_ = event.time;
    event.action();
  }
  now_ = std::max(now_, until);
}

void VirtualClock::run_until(double until) {
  drain([until](double t) { return t <= until; }, until);
}

void VirtualClock::run_before(double until) {
  drain([until](double t) { return t < until; }, until);
}

}  // namespace quicscatter::sim
