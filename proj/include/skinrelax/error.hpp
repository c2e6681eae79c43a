#pragma once

#include <stdexcept>
#include <string>

namespace skin {

// Config errors map to exit code 1, numeric ones to 2, verification to 3.
enum class ErrorKind { Config, Numeric, Verify };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string name, const std::string& message)
        : std::runtime_error(name + ": " + message), kind_(kind), name_(std::move(name))
    {
    }

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }

private:
    ErrorKind kind_;
    std::string name_;
};

[[noreturn]] inline void fail_numeric(const std::string& name, const std::string& message)
{
    throw Error(ErrorKind::Numeric, name, message);
}

[[noreturn]] inline void fail_config(const std::string& name, const std::string& message)
{
    throw Error(ErrorKind::Config, name, message);
}

[[noreturn]] inline void fail_verify(const std::string& name, const std::string& message)
{
    throw Error(ErrorKind::Verify, name, message);
}

} // namespace skin
