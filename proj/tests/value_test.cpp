#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "qjit/value.hpp"
#include "support.hpp"

namespace qjit {
namespace {

std::vector<Value> sample_values() {
  std::vector<Value> vs = {Value::null()};
  for (std::int64_t i : {std::numeric_limits<std::int64_t>::min(), std::int64_t{-3}, std::int64_t{-1}, std::int64_t{0},
                         std::int64_t{1}, std::int64_t{2}, std::int64_t{3}, std::int64_t{9007199254740993},
                         std::numeric_limits<std::int64_t>::max()}) {
    vs.push_back(Value::integer(i));
  }
  for (double r : {-std::numeric_limits<double>::infinity(), -2.5, -1.0, -0.0, 0.0, 0.5, 1.0, 2.0, 2.5,
                   9007199254740992.0, 9223372036854775808.0, std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::quiet_NaN()}) {
    vs.push_back(Value::real(r));
  }
  for (const char *s : {"", "a", "ab", "b", "B", "t10"}) vs.push_back(Value::text(s));
  return vs;
}

TEST(CompareValues, Examples) {
  EXPECT_EQ(compare_values(Value::integer(5), Value::integer(5)), Ordering::Equal);
  EXPECT_EQ(compare_values(Value::null(), Value::integer(0)), Ordering::Less);
  EXPECT_EQ(compare_values(Value::integer(2), Value::real(2.5)), Ordering::Less);
  EXPECT_EQ(compare_values(Value::real(2.0), Value::integer(2)), Ordering::Equal);
  EXPECT_EQ(compare_values(Value::integer(1000000), Value::text("1")), Ordering::Less);
}

TEST(CompareValues, LargeIntegersAreNotRoundedThroughDouble) {
  // 2^53 + 1 rounds to 2^53 as a double.
  EXPECT_EQ(compare_values(Value::integer(9007199254740993), Value::real(9007199254740992.0)), Ordering::Greater);
  EXPECT_EQ(compare_values(Value::integer(std::numeric_limits<std::int64_t>::max()), Value::real(9223372036854775808.0)),
            Ordering::Less);
}

TEST(CompareValues, MatchesOracleExhaustively) {
  auto vs = sample_values();
  for (const auto &a : vs) {
    for (const auto &b : vs) {
      EXPECT_EQ(compare_values(a, b), testing::oracle_compare(a, b)) << a << " vs " << b;
    }
  }
}

TEST(CompareValues, IsATotalOrder) {
  auto vs = sample_values();
  for (const auto &a : vs) {
    EXPECT_EQ(compare_values(a, a), Ordering::Equal) << a;
    for (const auto &b : vs) {
      Ordering ab = compare_values(a, b);
      Ordering ba = compare_values(b, a);
      EXPECT_EQ(static_cast<int>(ab), -static_cast<int>(ba)) << a << " vs " << b;
      for (const auto &c : vs) {
        if (ab != Ordering::Greater && compare_values(b, c) != Ordering::Greater) {
          EXPECT_NE(compare_values(a, c), Ordering::Greater) << a << " " << b << " " << c;
        }
      }
    }
  }
}

TEST(Value, CellRoundTrip) {
  for (const auto &v : sample_values()) {
    Value back = Value::from_cell(v.cell());
    if (v.type() == ValueType::Real && std::isnan(v.as_real())) {
      EXPECT_TRUE(std::isnan(back.as_real()));
    } else {
      EXPECT_EQ(back, v);
    }
  }
}

TEST(Value, DisplayForm) {
  EXPECT_EQ(Value::null().to_string(), "NULL");
  EXPECT_EQ(Value::integer(-42).to_string(), "-42");
  EXPECT_EQ(Value::real(0.1).to_string(), "0.10000000000000001");
  EXPECT_EQ(Value::text("x y").to_string(), "x y");
  EXPECT_EQ(type_name(ValueType::Real), "Real");
}

}  // namespace
}  // namespace qjit
