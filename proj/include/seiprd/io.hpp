#pragma once

#include "seiprd/observation.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace seiprd {

/// Model day 0 is 2020-02-17; dates are stored as integer offsets from it.
int day_from_iso(std::string_view date);
std::string iso_from_day(int day);
/// True for Saturdays and Sundays.
bool is_weekend(int day);

/// Reads a `date,count` file with ISO-8601 dates and non-negative integer counts.
/// Row numbers in error messages count data rows from 1.
CountSeries ingest_csv(const std::filesystem::path& path);
void write_count_csv(const std::filesystem::path& path, const CountSeries& series);

/// Shortest round-trip text for a double, locale independent.
std::string format_double(double value);

/// Hash git assigns to a blob with these contents ("blob <size>\0" + data, SHA-1).
std::string git_blob_hash(std::string_view contents);
std::string git_blob_hash_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace seiprd
