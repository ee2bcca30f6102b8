#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace munity {

class Value;

struct Bottom {
  bool operator==(const Bottom&) const = default;
};

/// Opaque location literal (`@cell0`). Compared only by equality.
struct Location {
  std::string name;
  bool operator==(const Location&) const = default;
};

/// Component-instance identifier, e.g. `client(1)`.
struct Address {
  std::string instance;
  bool operator==(const Address&) const = default;
};

/// Enumeration constant such as a message type (`#R`) or reply (`#Y`).
struct Symbol {
  std::string name;
  bool operator==(const Symbol&) const = default;
};

// Message types; F is the server-to-server forward request used by handoff.
enum class MsgType { M, H, R, S, U, P, Q, D, F };
enum class Reply { None, Y, N };

const char* to_string(MsgType t);
const char* to_string(Reply r);
bool parse_msg_type(const std::string& s, MsgType* out);

struct Message;
struct Record;
using Seq = std::vector<Value>;

class Value {
 public:
  enum class Kind { Bottom, Bool, Int, Location, Address, Symbol, Message, Seq, Record };

  Value() : v_(Bottom{}) {}
  static Value bottom() { return Value(); }
  static Value boolean(bool b);
  static Value integer(std::int64_t i);
  static Value location(std::string name);
  static Value address(std::string instance);
  static Value symbol(std::string name);
  static Value message(Message m);
  static Value seq(Seq items);
  static Value record(std::map<std::string, Value> fields);

  Kind kind() const { return static_cast<Kind>(v_.index()); }
  bool is_bottom() const { return kind() == Kind::Bottom; }
  bool is_seq() const { return kind() == Kind::Seq; }

  // Checked accessors; throw EvalError on kind mismatch.
  bool as_bool() const;
  std::int64_t as_int() const;
  const Location& as_location() const;
  const Address& as_address() const;
  const Symbol& as_symbol() const;
  const Message& as_message() const;
  const Seq& as_seq() const;
  const Record& as_record() const;

  /// Structural identity: null and the empty sequence are different values.
  friend bool operator==(const Value& a, const Value& b);

  /// Language-level `=`: as structural equality, except that null equals the
  /// empty sequence (queues start as null and drain back to empty).
  friend bool lang_equal(const Value& a, const Value& b);

  std::string str() const;
  nlohmann::json to_json() const;

  /// Content hash, stable across platforms and runs.
  void hash_into(std::uint64_t& h) const;

 private:
  using Storage =
      std::variant<Bottom, bool, std::int64_t, Location, Address, Symbol,
                   std::shared_ptr<const Message>, std::shared_ptr<const Seq>,
                   std::shared_ptr<const Record>>;
  explicit Value(Storage v) : v_(std::move(v)) {}
  Storage v_;
};

struct Message {
  bool status = false;  // sender-side "has been transmitted" flag
  Value source;
  Value destination;
  MsgType type = MsgType::M;
  Reply reply = Reply::None;
  Value content;

  bool operator==(const Message&) const = default;
};

struct Record {
  std::map<std::string, Value> fields;
  bool operator==(const Record&) const = default;
};

const char* kind_name(Value::Kind k);

// Overflow-checked integer arithmetic.
std::int64_t checked_add(std::int64_t a, std::int64_t b);
std::int64_t checked_sub(std::int64_t a, std::int64_t b);
std::int64_t checked_mul(std::int64_t a, std::int64_t b);

void fnv_mix(std::uint64_t& h, const void* data, std::size_t n);
inline void fnv_mix_u64(std::uint64_t& h, std::uint64_t v) {
  fnv_mix(h, &v, sizeof v);
}
constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;

std::string hex_digest(std::uint64_t h);

}  // namespace munity
