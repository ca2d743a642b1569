#pragma once

#include <stdexcept>
#include <string>

namespace fbamp {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GainOutOfRange : Error { using Error::Error; };
struct ParamOutOfRange : Error { using Error::Error; };
struct ModeReuse : Error { using Error::Error; };
struct UnassignedAmplitude : Error { using Error::Error; };
struct MalformedNetwork : Error { using Error::Error; };
struct SingularLoop : Error { using Error::Error; };
struct NearThreshold : Error { using Error::Error; };
struct DivergentUnroll : Error { using Error::Error; };
struct NonConvergence : Error { using Error::Error; };
struct DegenerateData : Error { using Error::Error; };

struct CsvError : Error {
    CsvError(const std::string& msg, int line_) : Error(msg), line(line_) {}
    int line;
};

}  // namespace fbamp
