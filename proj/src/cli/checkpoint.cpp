#include "summix/cli/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <map>

#include "json.hpp"
#include "summix/numcore/error.hpp"

namespace summix {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
constexpr const char* kFormat = "summix-checkpoint-v1";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

std::vector<std::uint8_t> to_le_bytes(const std::vector<double>& values) {
  std::vector<std::uint8_t> out(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(values[i]);
    for (int k = 0; k < 8; ++k) out[i * 8 + static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(bits >> (8 * k));
  }
  return out;
}

std::vector<double> from_le_bytes(const std::vector<std::uint8_t>& bytes) {
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(bytes[i * 8 + static_cast<std::size_t>(k)]) << (8 * k);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

}  // namespace

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    const std::size_t n = std::min<std::size_t>(3, bytes.size() - i);
    std::uint32_t v = static_cast<std::uint32_t>(bytes[i]) << 16;
    if (n > 1) v |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
    if (n > 2) v |= bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += n > 1 ? kAlphabet[(v >> 6) & 63] : '=';
    out += n > 2 ? kAlphabet[v & 63] : '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ConfigError("base64: length " + std::to_string(text.size()) + " is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    int pad = 0;
    std::uint32_t v = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && last && k >= 2) {
        ++pad;
        v <<= 6;
        continue;
      }
      const int d = decode_char(c);
      if (d < 0 || pad > 0) throw ConfigError("base64: invalid character at offset " + std::to_string(i + k));
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

template <typename Real>
std::string checkpoint_to_json(const Encoder<Real>& encoder) {
  auto& enc = const_cast<Encoder<Real>&>(encoder);  // collect() hands out mutable pointers; nothing is written
  nlohmann::json params = nlohmann::json::array();
  for (const Parameter<Real>* p : enc.parameters()) {
    std::vector<double> values(p->value.vec().begin(), p->value.vec().end());
    params.push_back({{"name", p->name}, {"shape", p->value.shape()}, {"f64_le_base64", base64_encode(to_le_bytes(values))}});
  }
  nlohmann::json doc = {{"format", kFormat},
                        {"config", nlohmann::json::parse(to_json(encoder.config))},
                        {"num_parameters", encoder.num_parameters()},
                        {"parameters", params}};
  return doc.dump(1) + "\n";
}

template <typename Real>
Encoder<Real> encoder_from_checkpoint(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
  if (!doc.contains("format") || doc["format"] != kFormat) throw ConfigError("checkpoint: missing or unknown format tag");
  Encoder<Real> enc = Encoder<Real>::create(encoder_config_from_json(doc.at("config").dump()), 0);
  std::map<std::string, Parameter<Real>*> by_name;
  for (Parameter<Real>* p : enc.parameters()) {
    if (!by_name.emplace(p->name, p).second) throw ConfigError("checkpoint: duplicate parameter name " + p->name);
  }
  const auto& params = doc.at("parameters");
  if (params.size() != by_name.size()) {
    throw ConfigError("checkpoint: " + std::to_string(params.size()) + " parameters stored, model has " +
                      std::to_string(by_name.size()));
  }
  for (const auto& p : params) {
    const std::string name = p.at("name").get<std::string>();
    auto it = by_name.find(name);
    if (it == by_name.end()) throw ConfigError("checkpoint: unknown parameter " + name);
    if (p.at("shape").get<Shape>() != it->second->value.shape()) throw ConfigError("checkpoint: shape mismatch for " + name);
    const auto values = from_le_bytes(base64_decode(p.at("f64_le_base64").get<std::string>()));
    if (values.size() != it->second->value.size()) throw ConfigError("checkpoint: size mismatch for " + name);
    auto& dst = it->second->value.vec();
    for (std::size_t i = 0; i < values.size(); ++i) dst[i] = static_cast<Real>(values[i]);
  }
  return enc;
}

template std::string checkpoint_to_json<float>(const Encoder<float>&);
template std::string checkpoint_to_json<double>(const Encoder<double>&);
template Encoder<float> encoder_from_checkpoint<float>(std::string_view);
template Encoder<double> encoder_from_checkpoint<double>(std::string_view);

}  // namespace summix
