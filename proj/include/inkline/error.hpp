#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace inkline {

// Engine error carrying a stable machine code ("module.reason") plus an
// optional detail string (row index, byte offset, column name, ...).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message, std::string detail = {})
        : std::runtime_error(message), code_(std::move(code)), detail_(std::move(detail)) {}

    const std::string& code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string code_;
    std::string detail_;
};

// Raised when a model/provider call fails; the service maps it to 502.
class ProviderError : public Error {
public:
    ProviderError(std::string provider, const std::string& message)
        : Error("provider.failure", message, provider), provider_(std::move(provider)) {}

    const std::string& provider() const noexcept { return provider_; }

private:
    std::string provider_;
};

class NotFound : public Error {
public:
    NotFound(const std::string& what, const std::string& id)
        : Error("not_found", what + " not found: " + id, id) {}
};

} // namespace inkline
