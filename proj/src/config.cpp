#include "ucplab/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "ucplab/errors.hpp"
#include "ucplab/report_json.hpp"

namespace ucplab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  std::ostringstream ss;
  ss << origin << ":" << line << ": " << msg;
  throw_config(ss.str());
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
      return false;
  return k.find("..") == std::string::npos;
}

/// Truncates at the first '#' that is outside a quoted string.
std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_str) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_str = false;
      }
    } else if (c == '"') {
      in_str = true;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

/// Splits on top-level commas, honoring quotes; brackets/braces do not nest
/// in this subset, so only string state matters.
std::vector<std::string> split_commas(const std::string& s, const std::string& origin, int line) {
  std::vector<std::string> parts;
  std::string cur;
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (in_str) {
      cur += c;
      if (c == '\\' && i + 1 < s.size()) {
        cur += s[++i];
      } else if (c == '"') {
        in_str = false;
      }
    } else if (c == '"') {
      in_str = true;
      cur += c;
    } else if (c == '[' || c == '{') {
      fail(origin, line, "nested arrays or tables are not supported");
    } else if (c == ',') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (in_str) fail(origin, line, "unterminated string");
  parts.push_back(trim(cur));
  return parts;
}

std::string parse_quoted(const std::string& s, const std::string& origin, int line) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"')
    fail(origin, line, "malformed string literal: " + s);
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    char c = s[i];
    if (c == '\\') {
      if (i + 2 >= s.size()) fail(origin, line, "dangling escape in string");
      char e = s[++i];
      switch (e) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        default: fail(origin, line, std::string("unknown escape \\") + e);
      }
    } else if (c == '"') {
      fail(origin, line, "unescaped quote inside string");
    } else {
      out += c;
    }
  }
  return out;
}

double parse_number(const std::string& s, const std::string& origin, int line) {
  if (s.empty()) fail(origin, line, "empty value");
  char* end = nullptr;
  double x = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size())
    fail(origin, line, "cannot parse value: " + s);
  if (!std::isfinite(x)) fail(origin, line, "non-finite number: " + s);
  return x;
}

}  // namespace

void Config::insert(const std::string& key, Value v, int line) {
  if (!valid_key(key)) fail(origin_, line, "invalid key: " + key);
  v.line = line;
  auto [it, fresh] = values_.emplace(key, std::move(v));
  if (!fresh)
    fail(origin_, line,
         "duplicate key '" + key + "' (first set on line " + std::to_string(it->second.line) + ")");
  order_.push_back(key);
}

Config Config::parse_text(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, lineno, "malformed section header: " + line);
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_key(section)) fail(origin, lineno, "invalid section name: " + section);
      continue;
    }

    std::size_t eq = std::string::npos;
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (in_str) {
        if (c == '\\') ++i;
        else if (c == '"') in_str = false;
      } else if (c == '"') {
        in_str = true;
      } else if (c == '=') {
        eq = i;
        break;
      }
    }
    if (eq == std::string::npos) fail(origin, lineno, "expected key = value, got: " + line);

    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) fail(origin, lineno, "missing key before '='");
    if (val.empty()) fail(origin, lineno, "missing value for key: " + key);
    if (!section.empty()) key = section + "." + key;

    if (val.front() == '{') {
      // Inline table: flatten each scalar member under the parent key.
      if (val.back() != '}') fail(origin, lineno, "unterminated inline table for key: " + key);
      std::string body = trim(val.substr(1, val.size() - 2));
      if (body.empty()) fail(origin, lineno, "empty inline table for key: " + key);
      for (const std::string& part : split_commas(body, origin, lineno)) {
        std::size_t peq = part.find('=');
        if (peq == std::string::npos)
          fail(origin, lineno, "inline table entries need key = value: " + part);
        std::string pk = trim(part.substr(0, peq));
        std::string pv = trim(part.substr(peq + 1));
        if (pk.empty() || pv.empty())
          fail(origin, lineno, "malformed inline table entry: " + part);
        Value v;
        if (pv.front() == '"') {
          v.kind = Value::Kind::string;
          v.str = parse_quoted(pv, origin, lineno);
        } else if (pv == "true" || pv == "false") {
          v.kind = Value::Kind::boolean;
          v.flag = (pv == "true");
        } else {
          v.kind = Value::Kind::number;
          v.num = parse_number(pv, origin, lineno);
        }
        cfg.insert(key + "." + pk, std::move(v), lineno);
      }
      continue;
    }

    Value v;
    if (val.front() == '[') {
      if (val.back() != ']') fail(origin, lineno, "unterminated array for key: " + key);
      std::string body = trim(val.substr(1, val.size() - 2));
      if (body.empty()) {
        v.kind = Value::Kind::empty_list;
      } else {
        bool strings = false, numbers = false;
        for (const std::string& part : split_commas(body, origin, lineno)) {
          if (part.empty()) fail(origin, lineno, "empty array element for key: " + key);
          if (part.front() == '"') {
            strings = true;
            v.strs.push_back(parse_quoted(part, origin, lineno));
          } else {
            numbers = true;
            v.nums.push_back(parse_number(part, origin, lineno));
          }
        }
        if (strings && numbers)
          fail(origin, lineno, "mixed string/number array for key: " + key);
        v.kind = strings ? Value::Kind::string_list : Value::Kind::number_list;
      }
    } else if (val.front() == '"') {
      v.kind = Value::Kind::string;
      v.str = parse_quoted(val, origin, lineno);
    } else if (val == "true" || val == "false") {
      v.kind = Value::Kind::boolean;
      v.flag = (val == "true");
    } else {
      v.kind = Value::Kind::number;
      v.num = parse_number(val, origin, lineno);
    }
    cfg.insert(key, std::move(v), lineno);
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  return parse_text(read_text_file(path), path);
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

const Config::Value& Config::at(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw_config(origin_ + ": missing required key: " + key);
  consumed_[key] = true;
  return it->second;
}

void Config::note_default(const std::string& key, Value v) const {
  if (defaults_.emplace(key, std::move(v)).second) default_order_.push_back(key);
}

double Config::get_number(const std::string& key) const {
  const Value& v = at(key);
  if (v.kind != Value::Kind::number)
    fail(origin_, v.line, "key '" + key + "' must be a number");
  return v.num;
}

double Config::get_number_or(const std::string& key, double fallback) const {
  if (!has(key)) {
    Value v;
    v.kind = Value::Kind::number;
    v.num = fallback;
    note_default(key, std::move(v));
    return fallback;
  }
  return get_number(key);
}

std::int64_t Config::get_integer(const std::string& key) const {
  const Value& v = at(key);
  if (v.kind != Value::Kind::number)
    fail(origin_, v.line, "key '" + key + "' must be an integer");
  double x = v.num;
  if (x != std::floor(x) || std::fabs(x) > 9.007199254740992e15)
    fail(origin_, v.line, "key '" + key + "' must be an integer, got " + format_g17(x));
  return static_cast<std::int64_t>(x);
}

std::int64_t Config::get_integer_or(const std::string& key, std::int64_t fallback) const {
  if (!has(key)) {
    Value v;
    v.kind = Value::Kind::number;
    v.num = static_cast<double>(fallback);
    note_default(key, std::move(v));
    return fallback;
  }
  return get_integer(key);
}

std::string Config::get_string(const std::string& key) const {
  const Value& v = at(key);
  if (v.kind != Value::Kind::string)
    fail(origin_, v.line, "key '" + key + "' must be a quoted string");
  return v.str;
}

std::string Config::get_string_or(const std::string& key, const std::string& fallback) const {
  if (!has(key)) {
    Value v;
    v.kind = Value::Kind::string;
    v.str = fallback;
    note_default(key, std::move(v));
    return fallback;
  }
  return get_string(key);
}

bool Config::get_bool(const std::string& key) const {
  const Value& v = at(key);
  if (v.kind != Value::Kind::boolean)
    fail(origin_, v.line, "key '" + key + "' must be true or false");
  return v.flag;
}

bool Config::get_bool_or(const std::string& key, bool fallback) const {
  if (!has(key)) {
    Value v;
    v.kind = Value::Kind::boolean;
    v.flag = fallback;
    note_default(key, std::move(v));
    return fallback;
  }
  return get_bool(key);
}

std::vector<double> Config::get_number_list(const std::string& key) const {
  const Value& v = at(key);
  if (v.kind == Value::Kind::empty_list) return {};
  if (v.kind != Value::Kind::number_list)
    fail(origin_, v.line, "key '" + key + "' must be an array of numbers");
  return v.nums;
}

std::vector<std::string> Config::get_string_list(const std::string& key) const {
  const Value& v = at(key);
  if (v.kind == Value::Kind::empty_list) return {};
  if (v.kind != Value::Kind::string_list)
    fail(origin_, v.line, "key '" + key + "' must be an array of strings");
  return v.strs;
}

std::vector<std::string> Config::get_string_list_or(
    const std::string& key, const std::vector<std::string>& fallback) const {
  if (!has(key)) {
    Value v;
    v.kind = fallback.empty() ? Value::Kind::empty_list : Value::Kind::string_list;
    v.strs = fallback;
    note_default(key, std::move(v));
    return fallback;
  }
  return get_string_list(key);
}

std::vector<std::string> Config::keys_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  std::string p = prefix + ".";
  for (const std::string& k : order_)
    if (k.rfind(p, 0) == 0) out.push_back(k);
  return out;
}

void Config::override_integer(const std::string& key, std::int64_t value) {
  Value v;
  v.kind = Value::Kind::number;
  v.num = static_cast<double>(value);
  auto it = values_.find(key);
  if (it == values_.end()) {
    values_.emplace(key, std::move(v));
    order_.push_back(key);
  } else {
    v.line = it->second.line;
    it->second = std::move(v);
  }
  defaults_.erase(key);
  consumed_[key] = true;
}

void Config::require_all_consumed() const {
  std::string leftover;
  for (const std::string& k : order_)
    if (!consumed_.count(k)) leftover += (leftover.empty() ? "" : ", ") + k;
  if (!leftover.empty())
    throw_config(origin_ + ": unknown key(s): " + leftover);
}

std::string Config::render(const Value& v) {
  switch (v.kind) {
    case Value::Kind::number:
      return format_g17(v.num);
    case Value::Kind::boolean:
      return v.flag ? "true" : "false";
    case Value::Kind::string: {
      std::string out = "\"";
      for (char c : v.str) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      return out + "\"";
    }
    case Value::Kind::empty_list:
      return "[]";
    case Value::Kind::number_list: {
      std::string out = "[";
      for (std::size_t i = 0; i < v.nums.size(); ++i)
        out += (i ? ", " : "") + format_g17(v.nums[i]);
      return out + "]";
    }
    case Value::Kind::string_list: {
      std::string out = "[";
      for (std::size_t i = 0; i < v.strs.size(); ++i) {
        if (i) out += ", ";
        out += "\"";
        for (char c : v.strs[i]) {
          if (c == '"' || c == '\\') out += '\\';
          out += c;
        }
        out += "\"";
      }
      return out + "]";
    }
  }
  return "";
}

std::vector<std::pair<std::string, std::string>> Config::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(order_.size() + default_order_.size());
  for (const std::string& k : order_) out.emplace_back(k, render(values_.at(k)));
  for (const std::string& k : default_order_)
    if (!values_.count(k)) out.emplace_back(k, render(defaults_.at(k)));
  return out;
}

}  // namespace ucplab
