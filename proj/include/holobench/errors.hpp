#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace holobench {

enum class Errc {
  InvalidArgument,
  AliasedCarrier,
  CropOutOfBounds,
  CropOverlap,
  GridMismatch,
  OrderTooHigh,
  BasisNotOrthonormal,
  IndexOutOfRange,
  NoSideband,
  ConjugateAmbiguity,
  SidebandAssignmentAmbiguous,
  SchemeMismatch,
  DuplicateInput,
  MissingInput,
  Config,
  Io,
  Format,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::AliasedCarrier: return "AliasedCarrier";
    case Errc::CropOutOfBounds: return "CropOutOfBounds";
    case Errc::CropOverlap: return "CropOverlap";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::OrderTooHigh: return "OrderTooHigh";
    case Errc::BasisNotOrthonormal: return "BasisNotOrthonormal";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::NoSideband: return "NoSideband";
    case Errc::ConjugateAmbiguity: return "ConjugateAmbiguity";
    case Errc::SidebandAssignmentAmbiguous: return "SidebandAssignmentAmbiguous";
    case Errc::SchemeMismatch: return "SchemeMismatch";
    case Errc::DuplicateInput: return "DuplicateInput";
    case Errc::MissingInput: return "MissingInput";
    case Errc::Config: return "Config";
    case Errc::Io: return "Io";
    case Errc::Format: return "Format";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Non-fatal conditions raised by numerical routines.
enum class Warn {
  DcContamination,
  NormalizationUnreliable,
  Saturation,
};

constexpr std::string_view to_string(Warn w) {
  switch (w) {
    case Warn::DcContamination: return "DcContamination";
    case Warn::NormalizationUnreliable: return "NormalizationUnreliable";
    case Warn::Saturation: return "SaturationWarning";
  }
  return "Unknown";
}

struct Warning {
  Warn kind;
  std::string message;
};

/// Optional warning sink. Every routine that can warn takes a nullable pointer to one.
struct Diagnostics {
  std::vector<Warning> items;

  void add(Warn kind, std::string message) { items.push_back({kind, std::move(message)}); }

  bool has(Warn kind) const {
    return std::any_of(items.begin(), items.end(), [kind](const Warning& w) { return w.kind == kind; });
  }
};

inline void warn(Diagnostics* diag, Warn kind, std::string message) {
  if (diag) diag->add(kind, std::move(message));
}

}  // namespace holobench
