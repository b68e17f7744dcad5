#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ucplab {

/// Flat key/value configuration in a TOML-like structured-text subset:
///
///   experiment = "solve"        # comments run to end of line
///   [grid]                      # section: keys below get the "grid." prefix
///   d = 1
///   m = 32
///   tau_list = [8, 16, 32]      # homogeneous arrays of numbers or strings
///   v = {kind="harmonic", kappa=1.0}   # inline table, flattened to v.kind...
///
/// Values are numbers (finite doubles), quoted strings, true/false, arrays,
/// or inline tables of scalars.  Everything else -- duplicate keys, unknown
/// escape sequences, stray text -- is a hard ErrorKind::config with the line
/// number.  Keys are dotted paths; a section header is only a prefix, so the
/// same config can be written flat ("grid.d = 1") and parses identically.
///
/// Reading is consumption-tracked: every getter marks its key used, defaults
/// for absent keys are recorded with their effective value, and
/// require_all_consumed() rejects leftovers.  entries() then returns the
/// fully resolved configuration (file order, then resolved defaults) with
/// canonical renderings that re-parse to the same values -- that is what the
/// run manifest embeds and hashes.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_text(const std::string& text, const std::string& origin = "<config>");

  bool has(const std::string& key) const;

  double get_number(const std::string& key) const;
  double get_number_or(const std::string& key, double fallback) const;
  std::int64_t get_integer(const std::string& key) const;
  std::int64_t get_integer_or(const std::string& key, std::int64_t fallback) const;
  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  bool get_bool(const std::string& key) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  std::vector<double> get_number_list(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;
  std::vector<std::string> get_string_list_or(const std::string& key,
                                              const std::vector<std::string>& fallback) const;

  /// Keys starting with "prefix." (file order); does not mark them consumed.
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  /// Replaces (or injects) a value from outside the file, e.g. a --seed
  /// override; the new value appears in entries() and counts as consumed.
  void override_integer(const std::string& key, std::int64_t value);

  /// Throws ErrorKind::config naming every key no getter has touched.
  void require_all_consumed() const;

  /// Fully resolved (key, canonical rendering) pairs; see class comment.
  std::vector<std::pair<std::string, std::string>> entries() const;

 private:
  struct Value {
    enum class Kind { number, string, boolean, number_list, string_list, empty_list };
    Kind kind = Kind::string;
    double num = 0.0;
    std::string str;
    bool flag = false;
    std::vector<double> nums;
    std::vector<std::string> strs;
    int line = 0;
  };

  const Value& at(const std::string& key) const;
  void insert(const std::string& key, Value v, int line);
  static std::string render(const Value& v);
  void note_default(const std::string& key, Value v) const;

  std::string origin_;
  std::vector<std::string> order_;
  std::map<std::string, Value> values_;
  mutable std::vector<std::string> default_order_;
  mutable std::map<std::string, Value> defaults_;
  mutable std::map<std::string, bool> consumed_;
};

}  // namespace ucplab
