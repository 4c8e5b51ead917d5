#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spfc/analysis.hpp"

namespace spfc {

// Formats a double in decimal with 17 significant digits, enough for exact
// float64 round-trips through any JSON parser.
std::string format_double(double v);

// Minimal streaming JSON writer with insertion-ordered keys. Reports must be
// byte-stable across runs (timing aside), so serialization is explicit here
// rather than delegated to a library with its own float formatting.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& name);
  JsonWriter& value(double v);
  JsonWriter& value(std::int64_t v);
  JsonWriter& value(std::uint64_t v);
  JsonWriter& value(int v);
  JsonWriter& value(bool v);
  JsonWriter& value(const std::string& v);
  JsonWriter& value(const char* v);

  const std::string& str() const { return out_; }

 private:
  void separate();
  std::string out_;
  std::vector<bool> first_in_scope_;
  bool pending_key_ = false;
};

std::string json_escape(const std::string& s);

// CSV table for the RTN comparison, header pinned to
// "N0,rtn_error,spfc_error,kappa,ratio".
std::string rtn_comparison_csv(const std::vector<RtnComparisonRow>& rows);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace spfc
