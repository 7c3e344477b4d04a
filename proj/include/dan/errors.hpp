#pragma once

#include <stdexcept>
#include <string>

namespace dan {

// Base of every error the library throws. CLI exit codes are chosen by type.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error { using Error::Error; };
struct ContractError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct VocabularyError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };

}  // namespace dan
