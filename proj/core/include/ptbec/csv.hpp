#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ptbec {

/// Shortest decimal form that round-trips to the same double; "nan", "inf",
/// "-inf" for non-finite values. Locale independent.
std::string format_number(double x);

/// Minimal CSV emitter: one header row, numeric rows, '\n' line endings.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);

  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);
  std::size_t columns() const noexcept { return columns_; }

 private:
  std::ostream& os_;
  std::size_t columns_;
};

}  // namespace ptbec
