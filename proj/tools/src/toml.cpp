#include "solatools/toml.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace solatools {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool bare_key_ok(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  return true;
}

// cut a trailing comment, respecting double-quoted strings
std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_str) {
      if (c == '\\') ++i;
      else if (c == '"') in_str = false;
    } else if (c == '"') {
      in_str = true;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

struct ValueParser {
  const std::string& s;
  std::size_t i = 0;
  const std::string& origin;
  int line;

  void skip_ws() {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  }

  json parse_string() {
    std::string out;
    ++i;  // opening quote
    while (i < s.size() && s[i] != '"') {
      char c = s[i];
      if (c == '\\') {
        ++i;
        if (i >= s.size()) fail(origin, line, "unterminated escape");
        switch (s[i]) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(origin, line, std::string("unknown escape \\") + s[i]);
        }
      } else {
        out += c;
      }
      ++i;
    }
    if (i >= s.size()) fail(origin, line, "unterminated string");
    ++i;  // closing quote
    return json(out);
  }

  json parse_bare() {
    std::size_t start = i;
    while (i < s.size() && s[i] != ',' && s[i] != ']' && s[i] != ' ' && s[i] != '\t') ++i;
    std::string tok = s.substr(start, i - start);
    if (tok == "true") return json(true);
    if (tok == "false") return json(false);
    bool looks_float = tok.find_first_of(".eE") != std::string::npos || tok == "inf" ||
                       tok == "-inf" || tok == "nan";
    // integer tokens stay integers so counts don't silently become floats
    errno = 0;
    char* end = nullptr;
    if (!looks_float) {
      long long v = std::strtoll(tok.c_str(), &end, 10);
      if (end && *end == '\0' && errno == 0 && !tok.empty()) return json(v);
    }
    end = nullptr;
    double d = std::strtod(tok.c_str(), &end);
    if (!tok.empty() && end && *end == '\0') return json(d);
    fail(origin, line, "bad value '" + tok + "'");
  }

  json parse_value() {
    skip_ws();
    if (i >= s.size()) fail(origin, line, "missing value");
    if (s[i] == '"') return parse_string();
    if (s[i] == '[') {
      ++i;
      json arr = json::array();
      skip_ws();
      while (i < s.size() && s[i] != ']') {
        arr.push_back(parse_value());
        skip_ws();
        if (i < s.size() && s[i] == ',') {
          ++i;
          skip_ws();
        } else if (i < s.size() && s[i] != ']') {
          fail(origin, line, "expected ',' or ']' in array");
        }
      }
      if (i >= s.size()) fail(origin, line, "unterminated array");
      ++i;
      return arr;
    }
    return parse_bare();
  }
};

}  // namespace

json parse_toml(const std::string& text, const std::string& origin) {
  json root = json::object();
  json* current = &root;
  std::string current_name;  // for error messages

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.size() >= 4 && line.substr(0, 2) == "[[" && line.substr(line.size() - 2) == "]]") {
      std::string name = trim(line.substr(2, line.size() - 4));
      if (!bare_key_ok(name)) fail(origin, lineno, "bad table name '" + name + "'");
      if (root.contains(name) && !root[name].is_array())
        fail(origin, lineno, "'" + name + "' used as both key and table array");
      if (!root.contains(name)) root[name] = json::array();
      root[name].push_back(json::object());
      current = &root[name].back();
      current_name = name;
      continue;
    }
    if (line.front() == '[' && line.back() == ']') {
      std::string name = trim(line.substr(1, line.size() - 2));
      if (!bare_key_ok(name)) fail(origin, lineno, "bad table name '" + name + "'");
      if (root.contains(name)) fail(origin, lineno, "duplicate table [" + name + "]");
      root[name] = json::object();
      current = &root[name];
      current_name = name;
      continue;
    }

    std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(origin, lineno, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    if (!bare_key_ok(key)) fail(origin, lineno, "bad key '" + key + "'");
    if (current->contains(key)) {
      std::string where = current_name.empty() ? "top level" : "[" + current_name + "]";
      fail(origin, lineno, "duplicate key '" + key + "' in " + where);
    }
    std::string value_text = trim(line.substr(eq + 1));
    ValueParser vp{value_text, 0, origin, lineno};
    json v = vp.parse_value();
    vp.skip_ws();
    if (vp.i != value_text.size()) fail(origin, lineno, "trailing characters after value");
    (*current)[key] = std::move(v);
  }
  return root;
}

json load_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  std::string text = buf.str();

  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError(path + ": invalid JSON document");
    return j;
  }
  return parse_toml(text, path);
}

}  // namespace solatools
