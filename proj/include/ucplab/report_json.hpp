#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ucplab/carleman.hpp"
#include "ucplab/dft.hpp"
#include "ucplab/grid.hpp"
#include "ucplab/operators.hpp"
#include "ucplab/spectra.hpp"
#include "ucplab/ucp.hpp"

namespace ucplab {

/// Prints a double with up to 17 significant digits (%.17g), enough for an
/// exact binary round trip; the experiment determinism contract depends on
/// every float in a report going through this one formatter.
std::string format_g17(double x);

/// Deterministic JSON emitter: keys in insertion order, two-space indent,
/// floats via format_g17.  Non-finite values are emitted as the strings
/// "inf" / "-inf" / "nan" so documents stay parseable JSON (the vanishing
/// order, for one, is +inf by design for a numerically zero field).
///
/// Usage is push-down: begin_object / key / value / end_object.  take()
/// finishes the document and throws ErrorKind::config if containers are
/// unbalanced -- that is a programming error in the serializer, and a
/// truncated report must never be written silently.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& k);

  JsonWriter& value(double x);
  JsonWriter& value(const std::string& s);
  JsonWriter& value(const char* s);
  JsonWriter& value(bool b);
  JsonWriter& value(int x);
  JsonWriter& value(std::int64_t x);
  JsonWriter& value(std::uint64_t x);

  JsonWriter& kv(const std::string& k, double x) { return key(k).value(x); }
  JsonWriter& kv(const std::string& k, const std::string& s) { return key(k).value(s); }
  JsonWriter& kv(const std::string& k, const char* s) { return key(k).value(s); }
  JsonWriter& kv(const std::string& k, bool b) { return key(k).value(b); }
  JsonWriter& kv(const std::string& k, int x) { return key(k).value(x); }
  JsonWriter& kv(const std::string& k, std::int64_t x) { return key(k).value(x); }
  JsonWriter& kv(const std::string& k, std::uint64_t x) { return key(k).value(x); }
  JsonWriter& kv(const std::string& k, const std::vector<double>& xs);

  std::string take();

 private:
  void separate();
  void newline_indent();

  std::string out_;
  std::vector<char> stack_;  // 'o' or 'a'
  bool need_comma_ = false;
  bool after_key_ = false;
};

/// Report bodies, appended field by field under the writer's current object.
/// Large per-point payloads (eigenvectors, density values) are not inlined:
/// they go to the binary GridFunction format or CSV, and the JSON carries
/// summaries plus provenance.
void append_fields(JsonWriter& w, const Grid& g);
void append_fields(JsonWriter& w, const SpectralResult& r);
void append_fields(JsonWriter& w, const DensityProfile& rho);
void append_fields(JsonWriter& w, const HKReport& r);
void append_fields(JsonWriter& w, const VanishingReport& r);
void append_fields(JsonWriter& w, const EquivalenceReport& r);
void append_fields(JsonWriter& w, const DerivativeVanishingReport& r);
void append_fields(JsonWriter& w, const SymbolInequalityReport& r);
void append_fields(JsonWriter& w, const CarlemanReport& r);
void append_fields(JsonWriter& w, const InequalityReport& r);
void append_fields(JsonWriter& w, const SqrtMonotoneReport& r);
void append_fields(JsonWriter& w, const BootstrapReport& r);

/// Whole-file text I/O; failures carry the path (ErrorKind::io).
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

/// CSV emission: optional '#'-prefixed comment lines, one header line, then
/// preformatted rows.  An empty row set still writes the header -- a
/// degenerate sweep produces a parseable, empty table, not a missing file.
void write_csv_file(const std::string& path, const std::vector<std::string>& comments,
                    const std::string& header, const std::vector<std::string>& rows);

/// 64-bit FNV-1a of a byte string, as 16 hex digits; used for config hashes.
std::string fnv1a_hex(const std::string& text);

}  // namespace ucplab
