#ifndef PHASELAB_ERRORS_HPP
#define PHASELAB_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace phaselab {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A waveform or score collection that violates an operation precondition.
struct InvalidInput : Error {
    using Error::Error;
};

/// STFT or perturbation parameters outside their valid domain.
struct InvalidParams : Error {
    using Error::Error;
};

/// Overlap-add synthesis hit a zero window-normalization denominator.
struct SynthesisError : Error {
    using Error::Error;
};

/// SNR is undefined for an all-zero signal.
struct UndefinedSnrError : Error {
    using Error::Error;
};

/// Malformed text input; carries the 1-based line number.
struct ParseError : Error {
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_number(line) {}
    std::size_t line_number;
};

/// Audio file with a codec, layout, or channel count we do not handle.
struct UnsupportedFormat : Error {
    using Error::Error;
};

/// Audio file that is structurally damaged (truncated, bad sizes, non-finite data).
struct CorruptFile : Error {
    using Error::Error;
};

/// Invalid job or experiment configuration.
struct ConfigError : Error {
    using Error::Error;
};

/// Training diverged (non-finite loss or weights).
struct TrainingError : Error {
    using Error::Error;
};

} // namespace phaselab

#endif
