#ifndef PLINF_CSV_HPP_
#define PLINF_CSV_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace plinf {

/// Shortest round-trip-safe text for a double: 17 significant digits,
/// `inf`/`-inf`/`nan` for non-finite values.
std::string format_number(double x);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view s);

/// 64-bit FNV-1a hash, stable across platforms.
unsigned long long fnv1a(std::string_view text);

}  // namespace plinf

#endif  // PLINF_CSV_HPP_
