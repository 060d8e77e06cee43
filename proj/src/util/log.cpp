/* Copyright 2026-present sfusim contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sfu/util/log.hpp"

#include <cstdlib>
#include <cstring>
#include <iostream>

#include "sfu/util/bytes.hpp"

namespace sfu {

std::string to_hex(BytesView data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xF]);
  }
  return out;
}

Bytes from_hex(const std::string& hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Bytes out;
  int hi = -1;
  for (char c : hex) {
    if (c == ' ' || c == '\n' || c == '\t') continue;
    int v = nibble(c);
    if (v < 0) throw std::invalid_argument("bad hex digit");
    if (hi < 0) {
      hi = v;
    } else {
      out.push_back(uint8_t((hi << 4) | v));
      hi = -1;
    }
  }
  if (hi >= 0) throw std::invalid_argument("odd hex length");
  return out;
}

}  // namespace sfu

namespace sfu::log {

namespace {

Level parse_env() {
  const char* env = std::getenv("SFUSIM_LOG");
  if (env == nullptr) return Level::warn;
  if (std::strcmp(env, "debug") == 0) return Level::debug;
  if (std::strcmp(env, "info") == 0) return Level::info;
  if (std::strcmp(env, "warn") == 0) return Level::warn;
  if (std::strcmp(env, "error") == 0) return Level::error;
  if (std::strcmp(env, "off") == 0) return Level::off;
  return Level::warn;
}

Level& current() {
  static Level lvl = parse_env();
  return lvl;
}

const char* name(Level lvl) {
  switch (lvl) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
    default: return "?";
  }
}

}  // namespace

Level level() { return current(); }
void set_level(Level lvl) { current() = lvl; }

void write(Level lvl, const std::string& msg) {
  if (lvl < current()) return;
  std::cerr << "[sfusim/" << name(lvl) << "] " << msg << "\n";
}

}  // namespace sfu::log
