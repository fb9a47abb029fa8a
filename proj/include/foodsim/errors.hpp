#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace foodsim {

// Exit-code buckets used by the CLI: io -> 2, validation -> 3, numeric -> 4.
enum class ErrorCategory { io, validation, numeric };

class Error : public std::runtime_error {
  public:
    Error(ErrorCategory category, std::string message)
        : std::runtime_error(std::move(message)), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

  private:
    ErrorCategory category_;
};

#define FOODSIM_DEFINE_ERROR(NAME, CATEGORY)                                     \
    class NAME : public Error {                                                  \
      public:                                                                    \
        explicit NAME(const std::string& message)                                \
            : Error(ErrorCategory::CATEGORY, std::string(#NAME ": ") + message) {} \
    }

// Transport / file layer.
FOODSIM_DEFINE_ERROR(IoError, io);
FOODSIM_DEFINE_ERROR(MalformedHeader, io);
FOODSIM_DEFINE_ERROR(TruncatedRecord, io);
FOODSIM_DEFINE_ERROR(UnparsableNumeric, io);

// Dataset / configuration layer.
FOODSIM_DEFINE_ERROR(MissingColumn, validation);
FOODSIM_DEFINE_ERROR(DuplicateId, validation);
FOODSIM_DEFINE_ERROR(UnknownCategory, validation);
FOODSIM_DEFINE_ERROR(EmptyInput, validation);
FOODSIM_DEFINE_ERROR(SupportMismatch, validation);
FOODSIM_DEFINE_ERROR(InvalidPeak, validation);
FOODSIM_DEFINE_ERROR(ModeMismatch, validation);
FOODSIM_DEFINE_ERROR(UnknownAttribute, validation);
FOODSIM_DEFINE_ERROR(UnknownGroup, validation);
FOODSIM_DEFINE_ERROR(InvalidMarginals, validation);
FOODSIM_DEFINE_ERROR(ConfigError, validation);
FOODSIM_DEFINE_ERROR(InvalidPmf, validation);

// Numerics.
FOODSIM_DEFINE_ERROR(DegenerateSystem, numeric);

#undef FOODSIM_DEFINE_ERROR

}  // namespace foodsim
