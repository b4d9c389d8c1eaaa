#pragma once

#include "ddgda/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ddgda {

/// Plain-text `key = value` document.
///
/// One entry per line; `#` starts a comment; blank lines are ignored.
/// Vector values are whitespace- or comma-separated. Numbers are written
/// with 17 significant digits so a write/read cycle is exact.
class KeyValueDoc {
public:
  static KeyValueDoc parse(std::string_view text);
  static KeyValueDoc load(const std::string &path);

  /// Insert or overwrite, keeping first-insertion order.
  void set(const std::string &key, std::string value);
  void set(const std::string &key, double value);
  void set(const std::string &key, std::int64_t value);
  void set(const std::string &key, const Eigen::Ref<const Vec> &values);

  bool has(const std::string &key) const;
  std::optional<std::string> find(const std::string &key) const;

  std::string get_string(const std::string &key) const;
  double get_double(const std::string &key) const;
  std::int64_t get_int(const std::string &key) const;
  Vec get_vector(const std::string &key) const;

  const std::vector<std::pair<std::string, std::string>> &entries() const noexcept {
    return entries_;
  }

  std::string str() const;

private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Round-trippable decimal rendering (17 significant digits).
std::string format_double(double v);

double parse_double(std::string_view text);
Vec parse_vector(std::string_view text);

} // namespace ddgda
