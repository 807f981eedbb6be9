#include "seiprd/io.hpp"

#include "seiprd/errors.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace seiprd {

namespace {

constexpr std::chrono::sys_days model_epoch{std::chrono::year{2020} / std::chrono::February / 17};

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <class Int>
bool parse_int(std::string_view text, Int& out)
{
  if (text.empty()) {
    return false;
  }
  const char* first = text.data();
  if (*first == '+') {
    ++first;
  }
  auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

int day_from_iso(std::string_view date)
{
  date = trim(date);
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (date.size() != 10 || date[4] != '-' || date[7] != '-' || !parse_int(date.substr(0, 4), y) ||
      !parse_int(date.substr(5, 2), m) || !parse_int(date.substr(8, 2), d)) {
    throw FormatError(0, "not an ISO-8601 date: '" + std::string(date) + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) {
    throw FormatError(0, "invalid calendar date: '" + std::string(date) + "'");
  }
  return static_cast<int>((std::chrono::sys_days{ymd} - model_epoch).count());
}

std::string iso_from_day(int day)
{
  const std::chrono::year_month_day ymd{model_epoch + std::chrono::days{day}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

bool is_weekend(int day)
{
  const std::chrono::weekday wd{model_epoch + std::chrono::days{day}};
  return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

CountSeries ingest_csv(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError(0, path.string() + ": empty file, expected header 'date,count'");
  }
  if (trim(line) != "date,count") {
    throw FormatError(0, path.string() + ": expected header 'date,count', got '" + line + "'");
  }

  CountSeries series;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) {
      continue;
    }
    ++row;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw FormatError(row, path.string() + ": row " + std::to_string(row) +
                                 " does not have two columns");
    }
    int day = 0;
    try {
      day = day_from_iso(std::string_view(line).substr(0, comma));
    } catch (const FormatError& e) {
      throw FormatError(row, path.string() + ": row " + std::to_string(row) + ": " + e.what());
    }
    std::int64_t count = 0;
    if (!parse_int(trim(std::string_view(line).substr(comma + 1)), count)) {
      throw FormatError(row, path.string() + ": row " + std::to_string(row) +
                                 ": count is not an integer");
    }
    try {
      series.push_back(day, count);
    } catch (const ValidationError& e) {
      throw ValidationError(row, path.string() + ": row " + std::to_string(row) + ": negative count " +
                                     std::to_string(count));
    } catch (const OrderingError& e) {
      throw OrderingError(row, path.string() + ": row " + std::to_string(row) + ": date " +
                                   iso_from_day(day) + " is not after the previous row");
    }
  }
  return series;
}

void write_count_csv(const std::filesystem::path& path, const CountSeries& series)
{
  std::ostringstream out;
  out << "date,count\n";
  for (const auto& o : series) {
    out << iso_from_day(o.day) << ',' << o.count << '\n';
  }
  write_file(path, out.str());
}

std::string format_double(double value)
{
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) {
    return "nan";
  }
  return std::string(buf.data(), ptr);
}

std::string git_blob_hash(std::string_view contents)
{
  const std::string header = "blob " + std::to_string(contents.size()) + '\0';
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), contents.data(), contents.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1) {
    throw IoError("SHA-1 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string git_blob_hash_file(const std::filesystem::path& path)
{
  return git_blob_hash(read_file(path));
}

std::string read_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

}  // namespace seiprd
