/*
 * Copyright 2026 The pcmf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pcmf/error.hpp"

namespace pcmf {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::NonFinite: return "NonFinite";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptySet: return "EmptySet";
    case Errc::DegeneratePromptSet: return "DegeneratePromptSet";
    case Errc::DegenerateProjection: return "DegenerateProjection";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::BatchTooSmall: return "BatchTooSmall";
    case Errc::StaleActivations: return "StaleActivations";
    case Errc::StepOutOfRange: return "StepOutOfRange";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::FingerprintMismatch: return "FingerprintMismatch";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::EmptyHoldout: return "EmptyHoldout";
    case Errc::UnknownKey: return "UnknownKey";
    case Errc::TypeError: return "TypeError";
    case Errc::RangeError: return "RangeError";
    case Errc::BadMagic: return "BadMagic";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::IoError: return "IoError";
    case Errc::UsageError: return "UsageError";
  }
  return "Unknown";
}

}  // namespace pcmf
