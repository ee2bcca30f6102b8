#include "munity/value.hpp"

#include <cstdio>
#include <sstream>

#include "munity/error.hpp"

namespace munity {

const char* to_string(MsgType t) {
  switch (t) {
    case MsgType::M: return "M";
    case MsgType::H: return "H";
    case MsgType::R: return "R";
    case MsgType::S: return "S";
    case MsgType::U: return "U";
    case MsgType::P: return "P";
    case MsgType::Q: return "Q";
    case MsgType::D: return "D";
    case MsgType::F: return "F";
  }
  return "?";
}

const char* to_string(Reply r) {
  switch (r) {
    case Reply::None: return "none";
    case Reply::Y: return "Y";
    case Reply::N: return "N";
  }
  return "?";
}

bool parse_msg_type(const std::string& s, MsgType* out) {
  static const std::pair<const char*, MsgType> table[] = {
      {"M", MsgType::M}, {"H", MsgType::H}, {"R", MsgType::R},
      {"S", MsgType::S}, {"U", MsgType::U}, {"P", MsgType::P},
      {"Q", MsgType::Q}, {"D", MsgType::D}, {"F", MsgType::F}};
  for (const auto& [name, t] : table) {
    if (s == name) {
      *out = t;
      return true;
    }
  }
  return false;
}

const char* kind_name(Value::Kind k) {
  switch (k) {
    case Value::Kind::Bottom: return "null";
    case Value::Kind::Bool: return "boolean";
    case Value::Kind::Int: return "integer";
    case Value::Kind::Location: return "location";
    case Value::Kind::Address: return "address";
    case Value::Kind::Symbol: return "symbol";
    case Value::Kind::Message: return "message";
    case Value::Kind::Seq: return "sequence";
    case Value::Kind::Record: return "record";
  }
  return "?";
}

Value Value::boolean(bool b) { return Value(Storage(b)); }
Value Value::integer(std::int64_t i) { return Value(Storage(i)); }
Value Value::location(std::string name) {
  return Value(Storage(Location{std::move(name)}));
}
Value Value::address(std::string instance) {
  return Value(Storage(Address{std::move(instance)}));
}
Value Value::symbol(std::string name) {
  return Value(Storage(Symbol{std::move(name)}));
}
Value Value::message(Message m) {
  return Value(Storage(std::make_shared<const Message>(std::move(m))));
}
Value Value::seq(Seq items) {
  return Value(Storage(std::make_shared<const Seq>(std::move(items))));
}
Value Value::record(std::map<std::string, Value> fields) {
  return Value(Storage(std::make_shared<const Record>(Record{std::move(fields)})));
}

namespace {

[[noreturn]] void mismatch(const char* want, Value::Kind got) {
  throw EvalError(std::string("type mismatch: expected ") + want + ", got " +
                  kind_name(got));
}

}  // namespace

bool Value::as_bool() const {
  if (kind() != Kind::Bool) mismatch("boolean", kind());
  return std::get<bool>(v_);
}
std::int64_t Value::as_int() const {
  if (kind() != Kind::Int) mismatch("integer", kind());
  return std::get<std::int64_t>(v_);
}
const Location& Value::as_location() const {
  if (kind() != Kind::Location) mismatch("location", kind());
  return std::get<Location>(v_);
}
const Address& Value::as_address() const {
  if (kind() != Kind::Address) mismatch("address", kind());
  return std::get<Address>(v_);
}
const Symbol& Value::as_symbol() const {
  if (kind() != Kind::Symbol) mismatch("symbol", kind());
  return std::get<Symbol>(v_);
}
const Message& Value::as_message() const {
  if (kind() != Kind::Message) mismatch("message", kind());
  return *std::get<std::shared_ptr<const Message>>(v_);
}
const Seq& Value::as_seq() const {
  if (kind() != Kind::Seq) mismatch("sequence", kind());
  return *std::get<std::shared_ptr<const Seq>>(v_);
}
const Record& Value::as_record() const {
  if (kind() != Kind::Record) mismatch("record", kind());
  return *std::get<std::shared_ptr<const Record>>(v_);
}

bool operator==(const Value& a, const Value& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Value::Kind::Message: {
      const auto& pa = std::get<std::shared_ptr<const Message>>(a.v_);
      const auto& pb = std::get<std::shared_ptr<const Message>>(b.v_);
      return pa == pb || *pa == *pb;
    }
    case Value::Kind::Seq: {
      const auto& pa = std::get<std::shared_ptr<const Seq>>(a.v_);
      const auto& pb = std::get<std::shared_ptr<const Seq>>(b.v_);
      return pa == pb || *pa == *pb;
    }
    case Value::Kind::Record: {
      const auto& pa = std::get<std::shared_ptr<const Record>>(a.v_);
      const auto& pb = std::get<std::shared_ptr<const Record>>(b.v_);
      return pa == pb || *pa == *pb;
    }
    default:
      return a.v_ == b.v_;
  }
}

bool lang_equal(const Value& a, const Value& b) {
  if (a.is_bottom() && b.is_seq()) return b.as_seq().empty();
  if (b.is_bottom() && a.is_seq()) return a.as_seq().empty();
  if (a.kind() != b.kind()) return false;
  if (a.is_seq()) {
    const Seq& x = a.as_seq();
    const Seq& y = b.as_seq();
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!lang_equal(x[i], y[i])) return false;
    }
    return true;
  }
  return a == b;
}

std::string Value::str() const {
  switch (kind()) {
    case Kind::Bottom: return "null";
    case Kind::Bool: return as_bool() ? "true" : "false";
    case Kind::Int: return std::to_string(as_int());
    case Kind::Location: return "@" + as_location().name;
    case Kind::Address: return as_address().instance;
    case Kind::Symbol: return "#" + as_symbol().name;
    case Kind::Message: {
      const Message& m = as_message();
      std::string s = "msg(";
      s += m.status ? "true" : "false";
      s += ", " + m.source.str() + ", " + m.destination.str() + ", #" +
           to_string(m.type);
      if (m.reply != Reply::None) s += std::string(", #") + to_string(m.reply);
      s += ", " + m.content.str() + ")";
      return s;
    }
    case Kind::Seq: {
      std::string s = "[";
      const Seq& q = as_seq();
      for (std::size_t i = 0; i < q.size(); ++i) {
        if (i) s += ", ";
        s += q[i].str();
      }
      return s + "]";
    }
    case Kind::Record: {
      std::string s = "rec(";
      bool first = true;
      for (const auto& [k, v] : as_record().fields) {
        if (!first) s += ", ";
        first = false;
        s += k + ": " + v.str();
      }
      return s + ")";
    }
  }
  return "?";
}

nlohmann::json Value::to_json() const {
  using nlohmann::json;
  switch (kind()) {
    case Kind::Bottom: return nullptr;
    case Kind::Bool: return as_bool();
    case Kind::Int: return as_int();
    case Kind::Location: return "@" + as_location().name;
    case Kind::Address: return as_address().instance;
    case Kind::Symbol: return "#" + as_symbol().name;
    case Kind::Message: {
      const Message& m = as_message();
      json j;
      j["status"] = m.status;
      j["source"] = m.source.to_json();
      j["destination"] = m.destination.to_json();
      j["type"] = to_string(m.type);
      if (m.reply != Reply::None) j["reply"] = to_string(m.reply);
      j["content"] = m.content.to_json();
      return j;
    }
    case Kind::Seq: {
      json arr = json::array();
      for (const auto& v : as_seq()) arr.push_back(v.to_json());
      return arr;
    }
    case Kind::Record: {
      json obj = json::object();
      for (const auto& [k, v] : as_record().fields) obj[k] = v.to_json();
      return obj;
    }
  }
  return nullptr;
}

void fnv_mix(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

namespace {

void mix_string(std::uint64_t& h, const std::string& s) {
  fnv_mix_u64(h, s.size());
  fnv_mix(h, s.data(), s.size());
}

}  // namespace

void Value::hash_into(std::uint64_t& h) const {
  fnv_mix_u64(h, static_cast<std::uint64_t>(kind()) + 0x9e);
  switch (kind()) {
    case Kind::Bottom: break;
    case Kind::Bool: fnv_mix_u64(h, as_bool() ? 1 : 0); break;
    case Kind::Int: fnv_mix_u64(h, static_cast<std::uint64_t>(as_int())); break;
    case Kind::Location: mix_string(h, as_location().name); break;
    case Kind::Address: mix_string(h, as_address().instance); break;
    case Kind::Symbol: mix_string(h, as_symbol().name); break;
    case Kind::Message: {
      const Message& m = as_message();
      fnv_mix_u64(h, m.status ? 1 : 0);
      m.source.hash_into(h);
      m.destination.hash_into(h);
      fnv_mix_u64(h, static_cast<std::uint64_t>(m.type));
      fnv_mix_u64(h, static_cast<std::uint64_t>(m.reply));
      m.content.hash_into(h);
      break;
    }
    case Kind::Seq: {
      const Seq& q = as_seq();
      fnv_mix_u64(h, q.size());
      for (const auto& v : q) v.hash_into(h);
      break;
    }
    case Kind::Record: {
      const auto& f = as_record().fields;
      fnv_mix_u64(h, f.size());
      for (const auto& [k, v] : f) {
        mix_string(h, k);
        v.hash_into(h);
      }
      break;
    }
  }
}

std::string hex_digest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw EvalError("integer overflow in +");
  return r;
}
std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw EvalError("integer overflow in -");
  return r;
}
std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw EvalError("integer overflow in *");
  return r;
}

}  // namespace munity
