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

#include "quicscatter/telescope/summary.hpp"

namespace quicscatter::telescope {

std::string operator_of(Ipv4Address ip, const PrefixTable& table) {
  auto info = table.lookup(ip);
  return info ? info->label : std::string(kUnknownOperator);
}

DatagramSummary summarize(const CaptureRecord& record, std::string operator_label) {
  DatagramSummary s;
  s.operator_label = std::move(operator_label);
  s.timestamp = record.datagram.timestamp;
  s.src_ip = record.datagram.src_ip;
  s.dst_ip = record.datagram.dst_ip;
  s.direction = record.direction;
  s.length = static_cast<uint32_t>(record.datagram.payload.size());
  for (const auto& p : record.packets) s.types.push_back(p.type);
  return s;
}

}  // namespace quicscatter::telescope
