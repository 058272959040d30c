// Copyright 2026 The SRG Authors
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

#include "srg/error.hpp"

namespace srg {

std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyCloud: return "EmptyCloud";
    case ErrorKind::DegenerateCloud: return "DegenerateCloud";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::CorruptModel: return "CorruptModel";
    case ErrorKind::NoCandidates: return "NoCandidates";
    case ErrorKind::NoValidPairs: return "NoValidPairs";
    case ErrorKind::PlacementFailure: return "PlacementFailure";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::Usage: return "UsageError";
  }
  return "Error";
}

}  // namespace srg
