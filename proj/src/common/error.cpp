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

#include "quicscatter/common/error.hpp"

namespace quicscatter {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::TruncatedPacket: return "TruncatedPacket";
    case Errc::InvalidCidLength: return "InvalidCidLength";
    case Errc::NotLongHeader: return "NotLongHeader";
    case Errc::UnreadableCapture: return "UnreadableCapture";
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::MixedLengths: return "MixedLengths";
    case Errc::InsufficientSamples: return "InsufficientSamples";
    case Errc::EmptyHarvest: return "EmptyHarvest";
    case Errc::MissingLabel: return "MissingLabel";
    case Errc::FieldOverflow: return "FieldOverflow";
    case Errc::BadLength: return "BadLength";
    case Errc::UnknownScidVersion: return "UnknownScidVersion";
    case Errc::UnknownRule: return "UnknownRule";
    case Errc::NotAVip: return "NotAVip";
    case Errc::TransportUnavailable: return "TransportUnavailable";
    case Errc::HarvestAborted: return "HarvestAborted";
    case Errc::Unsupported: return "Unsupported";
  }
  return "Unknown";
}

bool is_precondition_error(Errc code) noexcept {
  switch (code) {
    case Errc::InsufficientData:
    case Errc::MixedLengths:
    case Errc::InsufficientSamples:
    case Errc::EmptyHarvest:
    case Errc::MissingLabel:
    case Errc::HarvestAborted:
      return true;
    default:
      return false;
  }
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace quicscatter
