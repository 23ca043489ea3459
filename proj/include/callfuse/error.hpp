#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace callfuse {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `line` and `column` are 1-based; 0 means unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line = 0, std::size_t column = 0);

    std::size_t line() const noexcept { return m_line; }
    std::size_t column() const noexcept { return m_column; }

private:
    std::size_t m_line;
    std::size_t m_column;
};

/// Well-formed input that breaks a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Non-fatal findings (skipped rows, ignored fields, dropped columns).
/// Operations append to a caller-supplied sink; a null sink discards them.
struct Diagnostics {
    std::vector<std::string> messages;

    void add(std::string message) { messages.push_back(std::move(message)); }
    bool empty() const noexcept { return messages.empty(); }
    std::size_t size() const noexcept { return messages.size(); }
};

inline void report(Diagnostics* sink, std::string message)
{
    if (sink)
        sink->add(std::move(message));
}

}  // namespace callfuse
