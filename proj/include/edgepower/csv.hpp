#pragma once

#include <cstdint>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace edgepower::csv {

/// 12 significant digits, C locale, "nan"/"inf" for non-finite values.
std::string number(double value);

/// Accumulates comma-separated, newline-terminated rows.
class Writer {
 public:
  explicit Writer(std::initializer_list<std::string_view> header);
  explicit Writer(const std::vector<std::string>& header);

  Writer& cell(std::string_view text);
  Writer& cell(double value);
  Writer& cell(std::uint64_t value);
  Writer& cell(long long value);
  void end_row();

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  bool row_started_ = false;
};

}  // namespace edgepower::csv
