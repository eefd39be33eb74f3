//
// Project CliffMask - Copyright 2026 CliffMask Contributors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CLIFFMASK_CORE_ERROR_HPP
#define CLIFFMASK_CORE_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cliffmask {

enum class Errc {
  // SMILES parsing
  kUnbalancedRingClosure,
  kUnknownElement,
  kUnbalancedBranch,
  kMultiComponentInput,
  kSmilesSyntax,
  // chemistry / fragmentation
  kWidthMismatch,
  kEmptyCorpus,
  kRuleSyntax,
  // depiction / masking
  kLayoutFailure,
  kEmptyMask,
  kNoMaskableTargets,
  kDimensionMismatch,
  // benchmark
  kMissingColumn,
  kNonPositivePotency,
  kUnparsableSmiles,
  kLengthMismatch,
  kEmptyInput,
  kNoCliffCompounds,
  kDegenerateSample,
  kMissingEmbedding,
  // model
  kShapeMismatch,
  kEmptyOmega,
  kLabelOutOfRange,
  kNonFiniteLoss,
  kEmptySubstructure,
  // application
  kConfigInvalid,
  kMissingArtifact,
  kIoError,
};

inline std::string_view errc_name(Errc c) {
  switch (c) {
  case Errc::kUnbalancedRingClosure: return "UnbalancedRingClosure";
  case Errc::kUnknownElement: return "UnknownElement";
  case Errc::kUnbalancedBranch: return "UnbalancedBranch";
  case Errc::kMultiComponentInput: return "MultiComponentInput";
  case Errc::kSmilesSyntax: return "SmilesSyntax";
  case Errc::kWidthMismatch: return "WidthMismatch";
  case Errc::kEmptyCorpus: return "EmptyCorpus";
  case Errc::kRuleSyntax: return "RuleSyntax";
  case Errc::kLayoutFailure: return "LayoutFailure";
  case Errc::kEmptyMask: return "EmptyMask";
  case Errc::kNoMaskableTargets: return "NoMaskableTargets";
  case Errc::kDimensionMismatch: return "DimensionMismatch";
  case Errc::kMissingColumn: return "MissingColumn";
  case Errc::kNonPositivePotency: return "NonPositivePotency";
  case Errc::kUnparsableSmiles: return "UnparsableSmiles";
  case Errc::kLengthMismatch: return "LengthMismatch";
  case Errc::kEmptyInput: return "EmptyInput";
  case Errc::kNoCliffCompounds: return "NoCliffCompounds";
  case Errc::kDegenerateSample: return "DegenerateSample";
  case Errc::kMissingEmbedding: return "MissingEmbedding";
  case Errc::kShapeMismatch: return "ShapeMismatch";
  case Errc::kEmptyOmega: return "EmptyOmega";
  case Errc::kLabelOutOfRange: return "LabelOutOfRange";
  case Errc::kNonFiniteLoss: return "NonFiniteLoss";
  case Errc::kEmptySubstructure: return "EmptySubstructure";
  case Errc::kConfigInvalid: return "ConfigInvalid";
  case Errc::kMissingArtifact: return "MissingArtifact";
  case Errc::kIoError: return "IoError";
  }
  return "UnknownError";
}

// All library failures surface as Error; `offset` carries a byte position
// for parser diagnostics, `row` a record index for tabular input.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message, std::ptrdiff_t offset = -1)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message +
                           (offset >= 0
                                ? " (at byte " + std::to_string(offset) + ")"
                                : "")),
        code_(code),
        offset_(offset) {}

  Errc code() const noexcept { return code_; }
  std::ptrdiff_t offset() const noexcept { return offset_; }

 private:
  Errc code_;
  std::ptrdiff_t offset_;
};

[[noreturn]] inline void raise(Errc code, std::string message,
                               std::ptrdiff_t offset = -1) {
  throw Error(code, std::move(message), offset);
}

}  // namespace cliffmask

#endif  // CLIFFMASK_CORE_ERROR_HPP
