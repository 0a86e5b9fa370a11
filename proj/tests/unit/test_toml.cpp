#include <doctest.h>

#include "safe_manip/errors.hpp"
#include "safe_manip/toml_lite.hpp"

using namespace safe_manip;

TEST_CASE("toml scalars, arrays, and comments") {
  const auto t = TomlTable::parse_string(R"(
# top comment
count = 3        # trailing comment
ratio = -1.5e-2
label = "a # not a comment"
flag = true
values = [1.0, 2.0, 3.0]
names = ["a", "b"]
)",
                                         "inline");
  CHECK(t.number("count") == 3.0);
  CHECK(t.number("ratio") == doctest::Approx(-0.015));
  CHECK(t.str("label") == "a # not a comment");
  CHECK(t.boolean_or("flag", false));
  CHECK(t.number_array("values") == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(t.string_array("names") == std::vector<std::string>{"a", "b"});
  CHECK(t.number_or("absent", 7.0) == 7.0);
  CHECK_FALSE(t.has("absent"));
}

TEST_CASE("toml nested tables and table arrays") {
  const auto t = TomlTable::parse_string(R"(
[outer]
a = 1
[outer.inner]
b = 2
[[outer.item]]
c = 3
[[outer.item]]
c = 4
[outer.item.sub]
d = 5
)",
                                         "inline");
  const TomlTable* outer = t.table("outer");
  REQUIRE(outer != nullptr);
  CHECK(outer->number("a") == 1.0);
  REQUIRE(outer->table("inner") != nullptr);
  CHECK(outer->table("inner")->number("b") == 2.0);
  const auto* items = outer->table_array("item");
  REQUIRE(items != nullptr);
  REQUIRE(items->size() == 2);
  CHECK((*items)[0].number("c") == 3.0);
  CHECK((*items)[1].number("c") == 4.0);
  REQUIRE((*items)[1].table("sub") != nullptr);
  CHECK((*items)[1].table("sub")->number("d") == 5.0);
}

TEST_CASE("toml errors carry key names") {
  CHECK_THROWS_AS(TomlTable::parse_string("a = 1\na = 2\n", "x"), ConfigError);
  CHECK_THROWS_AS(TomlTable::parse_string("a = \n", "x"), ConfigError);
  const auto t = TomlTable::parse_string("a = 1\ns = \"v\"\n", "x");
  CHECK_THROWS_WITH_AS(t.number("missing"), doctest::Contains("missing"), ConfigError);
  CHECK_THROWS_AS(t.str("a"), ConfigError);
  CHECK_THROWS_AS(t.number("s"), ConfigError);
}

TEST_CASE("toml missing file raises io error") {
  CHECK_THROWS_AS(TomlTable::parse_file("/nonexistent/path.toml"), IoError);
}
