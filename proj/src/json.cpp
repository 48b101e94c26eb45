#include "sparc/json.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace sparc::json {

DecodeError::DecodeError(std::size_t offset, const std::string& reason)
    : std::runtime_error("byte " + std::to_string(offset) + ": " + reason), offset_(offset), reason_(reason) {}

namespace {

constexpr double kTwo53 = 9007199254740992.0;
constexpr double kQuantizeLimit = 9.0e9;  // |v| * 1e6 must stay below 2^53

const char* type_name(const Value::Storage& s) {
  switch (s.index()) {
    case 0: return "null";
    case 1: return "bool";
    case 2: return "number";
    case 3: return "string";
    case 4: return "array";
    default: return "object";
  }
}

[[noreturn]] void type_error(const Value& v, const char* expected) {
  throw DecodeError(v.offset(), std::string("expected ") + expected + ", got " + type_name(v.storage()));
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Value document() {
    skip_ws();
    Value v = value(0);
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters after document");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& reason) const { throw DecodeError(pos_, reason); }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) ++pos_;
  }

  char peek() const {
    if (pos_ >= s_.size()) throw DecodeError(pos_, "unexpected end of input");
    return s_[pos_];
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  Value value(int depth) {
    if (depth > 64) fail("nesting too deep");
    const std::size_t start = pos_;
    Value v;
    switch (peek()) {
      case '{': v = object(depth); break;
      case '[': v = array(depth); break;
      case '"': v = Value(string()); break;
      case 't': literal("true"); v = Value(true); break;
      case 'f': literal("false"); v = Value(false); break;
      case 'n': literal("null"); v = Value(nullptr); break;
      default: v = Value(number()); break;
    }
    v.set_offset(start);
    return v;
  }

  void literal(std::string_view word) {
    if (s_.substr(pos_, word.size()) != word) fail("invalid literal");
    pos_ += word.size();
  }

  Value object(int depth) {
    expect('{');
    Object obj;
    skip_ws();
    if (peek() == '}') {
      ++pos_;
      return Value(std::move(obj));
    }
    for (;;) {
      skip_ws();
      const std::size_t key_offset = pos_;
      if (peek() != '"') fail("expected object key");
      std::string key = string();
      for (const Member& m : obj) {
        if (m.key == key) throw DecodeError(key_offset, "duplicate key '" + key + "'");
      }
      skip_ws();
      expect(':');
      skip_ws();
      Value v = value(depth + 1);
      obj.push_back({std::move(key), std::move(v), key_offset});
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect('}');
      return Value(std::move(obj));
    }
  }

  Value array(int depth) {
    expect('[');
    Array arr;
    skip_ws();
    if (peek() == ']') {
      ++pos_;
      return Value(std::move(arr));
    }
    for (;;) {
      skip_ws();
      arr.push_back(value(depth + 1));
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect(']');
      return Value(std::move(arr));
    }
  }

  unsigned hex4() {
    if (pos_ + 4 > s_.size()) fail("truncated unicode escape");
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(s_.data() + pos_, s_.data() + pos_ + 4, v, 16);
    if (ec != std::errc() || ptr != s_.data() + pos_ + 4) fail("invalid unicode escape");
    pos_ += 4;
    return v;
  }

  static void append_utf8(std::string& out, unsigned cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }

  std::string string() {
    expect('"');
    std::string out;
    for (;;) {
      const char c = peek();
      ++pos_;
      if (c == '"') return out;
      if (static_cast<unsigned char>(c) < 0x20) {
        --pos_;
        fail("control character in string");
      }
      if (c != '\\') {
        out += c;
        continue;
      }
      const char e = peek();
      ++pos_;
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case '/': out += '/'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        case 't': out += '\t'; break;
        case 'u': {
          unsigned cp = hex4();
          if (cp >= 0xD800 && cp < 0xDC00) {
            if (s_.substr(pos_, 2) != "\\u") fail("unpaired surrogate");
            pos_ += 2;
            const unsigned lo = hex4();
            if (lo < 0xDC00 || lo >= 0xE000) fail("invalid low surrogate");
            cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
          } else if (cp >= 0xDC00 && cp < 0xE000) {
            fail("unpaired surrogate");
          }
          append_utf8(out, cp);
          break;
        }
        default:
          --pos_;
          fail("invalid escape");
      }
    }
  }

  double number() {
    const std::size_t start = pos_;
    if (pos_ < s_.size() && s_[pos_] == '-') ++pos_;
    if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      pos_ = start;
      if (pos_ >= s_.size()) fail("unexpected end of input");
      fail("unexpected character");
    }
    if (s_[pos_] == '0') {
      ++pos_;
    } else {
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail("digit expected after '.'");
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) fail("digit expected in exponent");
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (ec != std::errc() || ptr != s_.data() + pos_ || !std::isfinite(v)) {
      throw DecodeError(start, "number out of range");
    }
    return quantize(v);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

bool Value::as_bool() const {
  if (!is_bool()) type_error(*this, "bool");
  return std::get<bool>(v_);
}

double Value::as_number() const {
  if (!is_number()) type_error(*this, "number");
  return std::get<double>(v_);
}

std::int64_t Value::as_int() const {
  const double d = as_number();
  if (d != std::floor(d) || std::abs(d) >= kTwo53) throw DecodeError(offset_, "expected an integer");
  return static_cast<std::int64_t>(d);
}

const std::string& Value::as_string() const {
  if (!is_string()) type_error(*this, "string");
  return std::get<std::string>(v_);
}

const Array& Value::as_array() const {
  if (!is_array()) type_error(*this, "array");
  return std::get<Array>(v_);
}

const Object& Value::as_object() const {
  if (!is_object()) type_error(*this, "object");
  return std::get<Object>(v_);
}

Array& Value::as_array() {
  if (!is_array()) type_error(*this, "array");
  return std::get<Array>(v_);
}

Object& Value::as_object() {
  if (!is_object()) type_error(*this, "object");
  return std::get<Object>(v_);
}

const Value* Value::find(std::string_view key) const {
  if (!is_object()) return nullptr;
  for (const Member& m : std::get<Object>(v_)) {
    if (m.key == key) return &m.value;
  }
  return nullptr;
}

bool operator==(const Value& a, const Value& b) { return a.v_ == b.v_; }

double quantize(double v) {
  if (!std::isfinite(v) || v == std::floor(v) || std::abs(v) >= kQuantizeLimit) return v == 0.0 ? 0.0 : v;
  const double q = std::round(v * 1e6) / 1e6;
  return q == 0.0 ? 0.0 : q;
}

Fields::Fields(const Value& v) : v_(v), used_(v.as_object().size(), false) {}

const Value* Fields::opt(std::string_view key) {
  const Object& obj = v_.as_object();
  for (std::size_t i = 0; i < obj.size(); ++i) {
    if (obj[i].key == key) {
      used_[i] = true;
      return &obj[i].value;
    }
  }
  return nullptr;
}

const Value& Fields::req(std::string_view key) {
  if (const Value* v = opt(key)) return *v;
  throw DecodeError(v_.offset(), "missing field '" + std::string(key) + "'");
}

void Fields::done() const {
  const Object& obj = v_.as_object();
  for (std::size_t i = 0; i < obj.size(); ++i) {
    if (!used_[i]) throw DecodeError(obj[i].key_offset, "unknown field '" + obj[i].key + "'");
  }
}

Value parse(std::string_view text) { return Parser(text).document(); }

void write_number(std::string& out, double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("cannot encode a non-finite number");
  if (v == std::floor(v) && std::abs(v) < kTwo53) {
    out += std::to_string(static_cast<std::int64_t>(v));
    return;
  }
  if (std::abs(v) >= kQuantizeLimit) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
    return;
  }
  const std::int64_t micros = std::llround(v * 1e6);
  if (micros == 0) {
    out += '0';
    return;
  }
  const std::uint64_t mag = micros < 0 ? static_cast<std::uint64_t>(-micros) : static_cast<std::uint64_t>(micros);
  if (micros < 0) out += '-';
  out += std::to_string(mag / 1000000);
  std::uint64_t frac = mag % 1000000;
  if (frac == 0) return;
  char digits[7];
  std::snprintf(digits, sizeof digits, "%06llu", static_cast<unsigned long long>(frac));
  int len = 6;
  while (len > 0 && digits[len - 1] == '0') --len;
  out += '.';
  out.append(digits, static_cast<std::size_t>(len));
}

void write_string(std::string& out, std::string_view s) {
  out += '"';
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(static_cast<unsigned char>(c)));
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void write(std::string& out, const Value& v) {
  const auto& s = v.storage();
  switch (s.index()) {
    case 0: out += "null"; break;
    case 1: out += std::get<bool>(s) ? "true" : "false"; break;
    case 2: write_number(out, std::get<double>(s)); break;
    case 3: write_string(out, std::get<std::string>(s)); break;
    case 4: {
      out += '[';
      bool first = true;
      for (const Value& e : std::get<Array>(s)) {
        if (!first) out += ',';
        first = false;
        write(out, e);
      }
      out += ']';
      break;
    }
    default: {
      out += '{';
      bool first = true;
      for (const Member& m : std::get<Object>(s)) {
        if (!first) out += ',';
        first = false;
        write_string(out, m.key);
        out += ':';
        write(out, m.value);
      }
      out += '}';
    }
  }
}

std::string dump(const Value& v) {
  std::string out;
  write(out, v);
  return out;
}

}  // namespace sparc::json
