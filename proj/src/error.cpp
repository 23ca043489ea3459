#include "callfuse/error.hpp"

#include "callfuse/random.hpp"

#include <cmath>
#include <numbers>

namespace callfuse {

namespace {

std::string with_location(const std::string& message, std::size_t line, std::size_t column)
{
    if (line == 0)
        return message;
    std::string out = "line " + std::to_string(line);
    if (column != 0)
        out += ", column " + std::to_string(column);
    return out + ": " + message;
}

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : Error(with_location(message, line, column)), m_line(line), m_column(column)
{
}

double Rng::normal()
{
    double u1 = uniform();
    while (u1 <= 0.0)
        u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace callfuse
