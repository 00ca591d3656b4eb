#pragma once

#include <stdexcept>
#include <string>

namespace ppg {

// Exit code families used by the CLI. Library code throws, the CLI maps.
enum class ExitCode : int {
    Ok = 0,
    Config = 2,      // bad arguments, bad configuration values
    Schema = 3,      // parse errors, integrity violations, stale artifacts
    Numeric = 4,     // degenerate data, non-finite values, training failure
    Infeasible = 5,  // operating-point constraint cannot be met
};

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode exit_code() const noexcept { return code_; }

private:
    ExitCode code_;
};

struct ArgumentError : Error {
    explicit ArgumentError(const std::string& what) : Error(ExitCode::Config, what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ExitCode::Config, what) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(ExitCode::Schema, what) {}
};

struct IntegrityError : Error {
    explicit IntegrityError(const std::string& what) : Error(ExitCode::Schema, what) {}
};

struct SchemaError : Error {
    explicit SchemaError(const std::string& what) : Error(ExitCode::Schema, what) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& what) : Error(ExitCode::Numeric, what) {}
};

struct TrainingError : Error {
    explicit TrainingError(const std::string& what) : Error(ExitCode::Numeric, what) {}
};

struct InfeasibleError : Error {
    explicit InfeasibleError(const std::string& what) : Error(ExitCode::Infeasible, what) {}
};

}  // namespace ppg
