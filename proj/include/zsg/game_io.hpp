#pragma once

#include <string>
#include <variant>

#include "zsg/game.hpp"

namespace zsg {

// Canonical JSON form: fixed key order, 17-significant-digit floats, so that
// serialize/parse round-trips are bit-exact and output is byte-stable.
std::string serialize_game(const DiscountedGame& g);
std::string serialize_game(const EpisodicGame& g);

using AnyGame = std::variant<DiscountedGame, EpisodicGame>;

// Throws std::runtime_error with a field-citing message on malformed input.
AnyGame parse_game(const std::string& json_text);
AnyGame load_game_file(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double v);

// FNV-1a over bytes; used to key cached reference solutions.
uint64_t fnv1a_hash(const std::string& bytes);

}  // namespace zsg
