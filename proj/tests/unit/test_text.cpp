#include <doctest.h>

#include "callfuse/error.hpp"
#include "callfuse/text.hpp"

#include <cmath>
#include <limits>

using namespace callfuse;

TEST_CASE("csv quoting and embedded newlines")
{
    auto table = parse_csv("a,b,c\n1,\"x, y\",\"say \"\"hi\"\"\"\n\n2,\"multi\nline\",3\r\n");
    CHECK(table.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0][1] == "x, y");
    CHECK(table.rows[0][2] == "say \"hi\"");
    CHECK(table.rows[1][1] == "multi\nline");
    CHECK(table.rows[1][2] == "3");
    CHECK(table.row_lines == std::vector<std::size_t>{2, 4});
    CHECK(table.column("c") == 2);
    CHECK_FALSE(table.column("d").has_value());
}

TEST_CASE("csv errors")
{
    CHECK_THROWS_AS(parse_csv("a\n\"open\n"), ParseError);
    CHECK_THROWS_AS(parse_csv("a\nab\"c\n"), ParseError);
}

TEST_CASE("csv escape round-trips")
{
    const std::vector<std::string> fields{"plain", "with,comma", "q\"uote", "new\nline", ""};
    const auto text = "h1,h2,h3,h4,h5\n" + csv_line(fields);
    auto table = parse_csv(text);
    REQUIRE(table.rows.size() == 1);
    CHECK(table.rows[0] == fields);
}

TEST_CASE("number formatting")
{
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.1 + 0.2) == "0.30000000000000004");
    CHECK(format_fixed(0.6484, 3) == "0.648");
    CHECK(format_fixed(-0.0000001, 3) == "0.000");
    CHECK(format_fixed(2.0, 6) == "2.000000");
}

TEST_CASE("number parsing")
{
    CHECK(parse_double(" 1.25 ") == 1.25);
    CHECK(parse_double("+3") == 3.0);
    CHECK_FALSE(parse_double("1.2x").has_value());
    CHECK_FALSE(parse_double("").has_value());
    CHECK(parse_int("42") == 42);
    CHECK(parse_int("-7") == -7);
    CHECK_FALSE(parse_int("4.0").has_value());
}

TEST_CASE("split and trim")
{
    auto parts = split("a,,b", ',');
    REQUIRE(parts.size() == 3);
    CHECK(parts[1].empty());
    CHECK(trim("\t x \r\n") == "x");
}
