#include "ptbec/csv.hpp"

#include "ptbec/errors.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace ptbec {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header)
    : os_(os), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) os_ << ',';
    os_ << header[i];
  }
  os_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) {
    throw InvalidArgument("csv row has " + std::to_string(values.size()) + " fields, header has " +
                          std::to_string(columns_));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os_ << ',';
    os_ << format_number(values[i]);
  }
  os_ << '\n';
}

}  // namespace ptbec
