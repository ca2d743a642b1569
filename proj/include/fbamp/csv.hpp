#pragma once

#include <string>
#include <string_view>

#include "fbamp/experiments.hpp"

namespace fbamp::io {

/// Shortest decimal that round-trips the double exactly.
std::string format_double(double v);

/// CSV schema: `# key=value` comment lines, a `x,y` or `x,y,yerr` header row,
/// then one row per point. Gap records carry an empty y cell.
std::string write_csv(const experiments::DataSeries& series);

/// Inverse of write_csv; throws CsvError with the offending line number.
experiments::DataSeries read_csv(std::string_view text);

void write_csv_file(const std::string& path, const experiments::DataSeries& series);
experiments::DataSeries read_csv_file(const std::string& path);

}  // namespace fbamp::io
