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

#include <stdexcept>
#include <string>
#include <string_view>

namespace quicscatter {

enum class Errc {
  // wire
  TruncatedPacket,
  InvalidCidLength,
  NotLongHeader,
  // ingest / io
  UnreadableCapture,
  MalformedRecord,
  InvalidConfig,
  // analysis preconditions
  InsufficientData,
  MixedLengths,
  InsufficientSamples,
  EmptyHarvest,
  MissingLabel,
  // codecs
  FieldOverflow,
  BadLength,
  UnknownScidVersion,
  // classifier / sim / probe
  UnknownRule,
  NotAVip,
  TransportUnavailable,
  HarvestAborted,
  Unsupported,
};

std::string_view errc_name(Errc code) noexcept;

// True for errors that mean "the data cannot support this analysis" as
// opposed to bad input files or arguments.
bool is_precondition_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace quicscatter
