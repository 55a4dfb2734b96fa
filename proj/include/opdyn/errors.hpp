#pragma once

#include <stdexcept>
#include <string>

namespace opdyn {

enum class Errc {
    ZeroWeight,
    UnboundedWeight,
    NonInvertibleMap,
    InvalidSystem,
    InfiniteWanderingMass,
    NotDissipative,
    DistortionUnbounded,
    VerificationFailed,
    PreconditionFailed,
    ParseError,
    SchemaError,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::ZeroWeight: return "ZeroWeight";
        case Errc::UnboundedWeight: return "UnboundedWeight";
        case Errc::NonInvertibleMap: return "NonInvertibleMap";
        case Errc::InvalidSystem: return "InvalidSystem";
        case Errc::InfiniteWanderingMass: return "InfiniteWanderingMass";
        case Errc::NotDissipative: return "NotDissipative";
        case Errc::DistortionUnbounded: return "DistortionUnbounded";
        case Errc::VerificationFailed: return "VerificationFailed";
        case Errc::PreconditionFailed: return "PreconditionFailed";
        case Errc::ParseError: return "ParseError";
        case Errc::SchemaError: return "SchemaError";
    }
    return "UnknownError";
}

class OpdynError : public std::runtime_error {
  public:
    OpdynError(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    Errc code() const { return code_; }

  private:
    Errc code_;
};

}  // namespace opdyn
