#include <doctest.h>

#include <limits>

#include "munity/error.hpp"
#include "munity/value.hpp"

using namespace munity;

TEST_CASE("null equals null and nothing else") {
  CHECK(Value::bottom() == Value::bottom());
  CHECK_FALSE(Value::bottom() == Value::integer(0));
  CHECK_FALSE(Value::bottom() == Value::boolean(false));
  CHECK_FALSE(Value::bottom() == Value::address("client(0)"));
}

TEST_CASE("a drained queue compares equal to null at language level only") {
  Value empty = Value::seq({});
  CHECK(lang_equal(empty, Value::bottom()));
  CHECK(lang_equal(Value::bottom(), empty));
  CHECK_FALSE(empty == Value::bottom());
  CHECK_FALSE(lang_equal(Value::seq({Value::integer(1)}), Value::bottom()));
}

TEST_CASE("locations and addresses compare by name") {
  CHECK(Value::location("a") == Value::location("a"));
  CHECK_FALSE(Value::location("a") == Value::location("b"));
  CHECK_FALSE(Value::location("a") == Value::address("a"));
}

TEST_CASE("messages are fresh with status false") {
  Message m;
  CHECK_FALSE(m.status);
  CHECK(m.reply == Reply::None);
  Message n = m;
  n.status = true;
  CHECK_FALSE(Value::message(m) == Value::message(n));
}

TEST_CASE("checked accessors reject the wrong kind") {
  CHECK_THROWS_AS(Value::integer(1).as_bool(), EvalError);
  CHECK_THROWS_AS(Value::bottom().as_seq(), EvalError);
  CHECK(Value::integer(7).as_int() == 7);
}

TEST_CASE("integer overflow raises instead of wrapping") {
  auto max = std::numeric_limits<std::int64_t>::max();
  auto min = std::numeric_limits<std::int64_t>::min();
  CHECK_THROWS_AS(checked_add(max, 1), EvalError);
  CHECK_THROWS_AS(checked_sub(min, 1), EvalError);
  CHECK_THROWS_AS(checked_mul(max, 2), EvalError);
  CHECK(checked_add(2, 3) == 5);
  CHECK(checked_mul(-4, 5) == -20);
}

TEST_CASE("hash follows structure") {
  auto h = [](const Value& v) {
    std::uint64_t x = kFnvOffset;
    v.hash_into(x);
    return x;
  };
  Value a = Value::seq({Value::integer(1), Value::boolean(true)});
  Value b = Value::seq({Value::integer(1), Value::boolean(true)});
  Value c = Value::seq({Value::boolean(true), Value::integer(1)});
  CHECK(h(a) == h(b));
  CHECK(h(a) != h(c));
  CHECK(h(Value::seq({})) != h(Value::bottom()));
}

TEST_CASE("message types round-trip through their names") {
  for (MsgType t : {MsgType::M, MsgType::H, MsgType::R, MsgType::S, MsgType::U, MsgType::P,
                    MsgType::Q, MsgType::D, MsgType::F}) {
    MsgType back;
    REQUIRE(parse_msg_type(to_string(t), &back));
    CHECK(back == t);
  }
  MsgType out;
  CHECK_FALSE(parse_msg_type("Z", &out));
}

TEST_CASE("records and messages print and serialize") {
  Value r = Value::record({{"topic", Value::integer(1)}});
  CHECK(r.to_json()["topic"] == 1);
  CHECK_FALSE(r.str().empty());
}
