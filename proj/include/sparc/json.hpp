#pragma once

// Minimal JSON document model for the wire format.
//
// Every value remembers the byte offset it was parsed from so that schema
// errors can point into the original message. Numbers are doubles; integral
// values print as integers and everything else prints in fixed notation with
// at most six fractional digits.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace sparc::json {

class DecodeError : public std::runtime_error {
 public:
  DecodeError(std::size_t offset, const std::string& reason);
  std::size_t offset() const { return offset_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t offset_;
  std::string reason_;
};

class Value;

struct Member;
using Array = std::vector<Value>;
using Object = std::vector<Member>;

class Value {
 public:
  using Storage = std::variant<std::nullptr_t, bool, double, std::string, Array, Object>;

  Value() : v_(nullptr) {}
  Value(std::nullptr_t) : v_(nullptr) {}
  Value(bool b) : v_(b) {}
  Value(double d) : v_(d) {}
  Value(int i) : v_(static_cast<double>(i)) {}
  Value(std::int64_t i) : v_(static_cast<double>(i)) {}
  Value(std::uint64_t i) : v_(static_cast<double>(i)) {}
  Value(const char* s) : v_(std::string(s)) {}
  Value(std::string s) : v_(std::move(s)) {}
  Value(std::string_view s) : v_(std::string(s)) {}
  Value(Array a) : v_(std::move(a)) {}
  Value(Object o) : v_(std::move(o)) {}

  bool is_null() const { return std::holds_alternative<std::nullptr_t>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_number() const { return std::holds_alternative<double>(v_); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_array() const { return std::holds_alternative<Array>(v_); }
  bool is_object() const { return std::holds_alternative<Object>(v_); }

  // Typed accessors throw DecodeError at this value's offset on mismatch.
  bool as_bool() const;
  double as_number() const;
  std::int64_t as_int() const;
  const std::string& as_string() const;
  const Array& as_array() const;
  const Object& as_object() const;
  Array& as_array();
  Object& as_object();

  /// Object lookup; nullptr when absent or not an object.
  const Value* find(std::string_view key) const;

  std::size_t offset() const { return offset_; }
  void set_offset(std::size_t off) { offset_ = off; }
  const Storage& storage() const { return v_; }

  /// Structural equality; offsets are ignored.
  friend bool operator==(const Value& a, const Value& b);

 private:
  Storage v_;
  std::size_t offset_ = 0;
};

struct Member {
  std::string key;
  Value value;
  std::size_t key_offset = 0;

  friend bool operator==(const Member& a, const Member& b) { return a.key == b.key && a.value == b.value; }
};

/// Rounds to the nearest multiple of 1e-6 (integral values are untouched).
double quantize(double v);

/// Parses one JSON document. Non-integral numbers are quantized.
Value parse(std::string_view text);

void write(std::string& out, const Value& v);
std::string dump(const Value& v);
void write_number(std::string& out, double v);
void write_string(std::string& out, std::string_view s);

/// Strict object reader: every key must be consumed before done().
class Fields {
 public:
  explicit Fields(const Value& v);
  /// Throws DecodeError at the object's offset when the key is missing.
  const Value& req(std::string_view key);
  const Value* opt(std::string_view key);
  /// Throws DecodeError at the first unknown key.
  void done() const;

 private:
  const Value& v_;
  std::vector<bool> used_;
};

/// Convenience builder for objects with insertion order preserved.
class ObjectBuilder {
 public:
  ObjectBuilder& add(std::string key, Value v) {
    obj_.push_back({std::move(key), std::move(v), 0});
    return *this;
  }
  Value build() { return Value(std::move(obj_)); }

 private:
  Object obj_;
};

}  // namespace sparc::json
