#include "zsg/game_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace zsg {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

uint64_t fnv1a_hash(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

// Emits nested arrays over the trailing dims of a flat row-major tensor.
void emit_tensor(std::ostringstream& os, const double* data, const int* dims, int ndim) {
  if (ndim == 1) {
    os << '[';
    for (int i = 0; i < dims[0]; ++i) {
      if (i) os << ',';
      os << format_double(data[i]);
    }
    os << ']';
    return;
  }
  size_t stride = 1;
  for (int d = 1; d < ndim; ++d) stride *= dims[d];
  os << '[';
  for (int i = 0; i < dims[0]; ++i) {
    if (i) os << ',';
    emit_tensor(os, data + i * stride, dims + 1, ndim - 1);
  }
  os << ']';
}

void flatten_into(const nlohmann::json& node, const std::vector<int>& dims, size_t depth,
                  std::vector<double>& out, const char* field) {
  if (!node.is_array() || node.size() != static_cast<size_t>(dims[depth]))
    throw std::runtime_error(std::string("field '") + field + "': expected array of length " +
                             std::to_string(dims[depth]) + " at depth " + std::to_string(depth));
  if (depth + 1 == dims.size()) {
    for (const auto& v : node) {
      if (!v.is_number())
        throw std::runtime_error(std::string("field '") + field + "': non-numeric entry");
      out.push_back(v.get<double>());
    }
  } else {
    for (const auto& child : node) flatten_into(child, dims, depth + 1, out, field);
  }
}

std::vector<double> read_tensor(const nlohmann::json& j, const char* field,
                                const std::vector<int>& dims) {
  if (!j.contains(field))
    throw std::runtime_error(std::string("missing field '") + field + "'");
  std::vector<double> out;
  size_t n = 1;
  for (int d : dims) n *= d;
  out.reserve(n);
  flatten_into(j.at(field), dims, 0, out, field);
  return out;
}

int read_count(const nlohmann::json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_number_integer())
    throw std::runtime_error(std::string("missing or non-integer field '") + field + "'");
  return j.at(field).get<int>();
}

}  // namespace

std::string serialize_game(const DiscountedGame& g) {
  std::ostringstream os;
  os << "{\"kind\":\"discounted\",\"num_states\":" << g.num_states
     << ",\"num_actions_max\":" << g.num_actions_max
     << ",\"num_actions_min\":" << g.num_actions_min
     << ",\"gamma\":" << format_double(g.gamma) << ",\"reward\":";
  const int rdims[3] = {g.num_states, g.num_actions_max, g.num_actions_min};
  emit_tensor(os, g.reward.data(), rdims, 3);
  os << ",\"transition\":";
  const int tdims[4] = {g.num_states, g.num_actions_max, g.num_actions_min, g.num_states};
  emit_tensor(os, g.transition.data(), tdims, 4);
  os << "}";
  return os.str();
}

std::string serialize_game(const EpisodicGame& g) {
  std::ostringstream os;
  os << "{\"kind\":\"episodic\",\"num_states\":" << g.num_states
     << ",\"num_actions_max\":" << g.num_actions_max
     << ",\"num_actions_min\":" << g.num_actions_min
     << ",\"horizon\":" << g.horizon << ",\"reward\":";
  const int rdims[4] = {g.horizon, g.num_states, g.num_actions_max, g.num_actions_min};
  emit_tensor(os, g.reward.data(), rdims, 4);
  os << ",\"transition\":";
  const int tdims[5] = {g.horizon - 1, g.num_states, g.num_actions_max, g.num_actions_min,
                        g.num_states};
  emit_tensor(os, g.transition.data(), tdims, 5);
  os << "}";
  return os.str();
}

AnyGame parse_game(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("game file is not valid JSON: ") + e.what());
  }
  if (!j.contains("kind") || !j.at("kind").is_string())
    throw std::runtime_error("missing field 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "discounted" && kind != "episodic")
    throw std::runtime_error("field 'kind' must be \"discounted\" or \"episodic\", got \"" + kind +
                             "\"");
  const int nS = read_count(j, "num_states");
  const int nA = read_count(j, "num_actions_max");
  const int nB = read_count(j, "num_actions_min");
  if (kind == "discounted") {
    DiscountedGame g;
    g.num_states = nS;
    g.num_actions_max = nA;
    g.num_actions_min = nB;
    if (!j.contains("gamma") || !j.at("gamma").is_number())
      throw std::runtime_error("missing or non-numeric field 'gamma'");
    g.gamma = j.at("gamma").get<double>();
    g.reward = read_tensor(j, "reward", {nS, nA, nB});
    g.transition = read_tensor(j, "transition", {nS, nA, nB, nS});
    return g;
  }
  if (kind == "episodic") {
    EpisodicGame g;
    g.num_states = nS;
    g.num_actions_max = nA;
    g.num_actions_min = nB;
    g.horizon = read_count(j, "horizon");
    if (g.horizon < 1) throw std::runtime_error("field 'horizon' must be >= 1");
    g.reward = read_tensor(j, "reward", {g.horizon, nS, nA, nB});
    g.transition = read_tensor(j, "transition", {g.horizon - 1, nS, nA, nB, nS});
    return g;
  }
  throw std::runtime_error("unreachable kind dispatch");
}

AnyGame load_game_file(const std::string& path) { return parse_game(read_text_file(path)); }

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace zsg
