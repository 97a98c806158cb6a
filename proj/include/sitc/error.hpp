#pragma once

#include <stdexcept>
#include <string>

namespace sitc {

// Every error carries the module that raised it so the CLI can print
// `module: kind: message` as a single machine-parsable line.
class Error : public std::runtime_error {
public:
    Error(std::string module, std::string kind, const std::string& message)
        : std::runtime_error(module + ": " + kind + ": " + message),
          module_(std::move(module)),
          kind_(std::move(kind)) {}

    const std::string& module() const noexcept { return module_; }
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string module_;
    std::string kind_;
};

class ParseError : public Error {
public:
    ParseError(std::string module, const std::string& message)
        : Error(std::move(module), "parse error", message) {}
};

class ValidationError : public Error {
public:
    ValidationError(std::string module, const std::string& message)
        : Error(std::move(module), "validation error", message) {}
};

class IndexError : public Error {
public:
    IndexError(std::string module, const std::string& message)
        : Error(std::move(module), "index error", message) {}
};

class ParameterError : public Error {
public:
    ParameterError(std::string module, const std::string& message)
        : Error(std::move(module), "parameter error", message) {}
};

class StateError : public Error {
public:
    StateError(std::string module, const std::string& message)
        : Error(std::move(module), "state error", message) {}
};

class LookupError : public Error {
public:
    LookupError(std::string module, const std::string& message)
        : Error(std::move(module), "lookup error", message) {}
};

class IoError : public Error {
public:
    IoError(std::string module, const std::string& message)
        : Error(std::move(module), "io error", message) {}
};

}  // namespace sitc
