#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by the loaders and writers.
namespace haze::text {

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool iequals_ascii(std::string_view a, std::string_view b);
bool icontains_ascii(std::string_view haystack, std::string_view needle);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

// Shortest representation that round-trips through parse_double.
std::string format_double(double v);
// Fixed precision, for human-facing tables.
std::string format_fixed(double v, int digits);

// RFC 4180 style field splitting: commas separate, double quotes group, "" escapes a quote.
std::vector<std::string> split_csv(std::string_view line);
std::string quote_csv(std::string_view field);

std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace haze::text
