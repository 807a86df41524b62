#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace jumpmlmc::csv {

// Shortest round-trip decimal form, '.' separator, independent of locale.
std::string format(double v);
std::string format(std::uint64_t v);
std::string format(std::int64_t v);
inline std::string format(int v) { return format(static_cast<std::int64_t>(v)); }

// Quotes a field when it contains a comma, quote or line break.
std::string escape(std::string_view field);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws std::out_of_range for an unknown column.
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
  const std::string& text(std::size_t row, std::string_view name) const;
};

Table parse(std::string_view text);
Table read_file(const std::filesystem::path& path);

// Parses a decimal double with std::from_chars; throws std::invalid_argument.
double parse_double(std::string_view s);

}  // namespace jumpmlmc::csv
