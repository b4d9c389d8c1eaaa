#include "ddgda/keyvalue.hpp"

#include "ddgda/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ddgda {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

} // namespace

std::string format_double(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view text) {
  const std::string s(trim(text));
  if (s.empty())
    throw InvalidArgument("expected a number, got an empty value");
  errno = 0;
  char *end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE)
    throw InvalidArgument("cannot parse number '" + s + "'");
  return v;
}

Vec parse_vector(std::string_view text) {
  std::string s(text);
  for (auto &c : s)
    if (c == ',' || c == ';')
      c = ' ';
  std::istringstream in(s);
  std::vector<double> values;
  std::string token;
  while (in >> token)
    values.push_back(parse_double(token));
  return Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

KeyValueDoc KeyValueDoc::parse(std::string_view text) {
  KeyValueDoc doc;
  std::size_t lineno = 0;
  while (!text.empty()) {
    ++lineno;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw InvalidArgument("line " + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (key.empty())
      throw InvalidArgument("line " + std::to_string(lineno) + ": empty key");
    doc.set(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return doc;
}

KeyValueDoc KeyValueDoc::load(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw InvalidArgument("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void KeyValueDoc::set(const std::string &key, std::string value) {
  for (auto &[k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(key, std::move(value));
}

void KeyValueDoc::set(const std::string &key, double value) { set(key, format_double(value)); }

void KeyValueDoc::set(const std::string &key, std::int64_t value) {
  set(key, std::to_string(value));
}

void KeyValueDoc::set(const std::string &key, const Eigen::Ref<const Vec> &values) {
  std::string out;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (i)
      out += ' ';
    out += format_double(values[i]);
  }
  set(key, std::move(out));
}

bool KeyValueDoc::has(const std::string &key) const { return find(key).has_value(); }

std::optional<std::string> KeyValueDoc::find(const std::string &key) const {
  for (const auto &[k, v] : entries_)
    if (k == key)
      return v;
  return std::nullopt;
}

std::string KeyValueDoc::get_string(const std::string &key) const {
  auto v = find(key);
  if (!v)
    throw InvalidArgument("missing key '" + key + "'");
  return *v;
}

double KeyValueDoc::get_double(const std::string &key) const {
  try {
    return parse_double(get_string(key));
  } catch (const InvalidArgument &e) {
    throw InvalidArgument("key '" + key + "': " + e.what());
  }
}

std::int64_t KeyValueDoc::get_int(const std::string &key) const {
  const auto s = std::string(trim(get_string(key)));
  errno = 0;
  char *end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    // Accept integral values written in floating notation, e.g. 3e5.
    const double d = get_double(key);
    if (std::floor(d) != d || std::abs(d) > 9.0e18)
      throw InvalidArgument("key '" + key + "': expected an integer, got '" + s + "'");
    return static_cast<std::int64_t>(d);
  }
  return v;
}

Vec KeyValueDoc::get_vector(const std::string &key) const {
  try {
    return parse_vector(get_string(key));
  } catch (const InvalidArgument &e) {
    throw InvalidArgument("key '" + key + "': " + e.what());
  }
}

std::string KeyValueDoc::str() const {
  std::string out;
  for (const auto &[k, v] : entries_) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

} // namespace ddgda
