#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "summix/blocks/encoder.hpp"

namespace summix {

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
// Throws ConfigError on characters outside the standard alphabet or bad padding.
std::vector<std::uint8_t> base64_decode(std::string_view text);

// JSON document: format tag, encoder config, then every parameter by name with
// its shape and values as base64 of little-endian f64.
template <typename Real>
std::string checkpoint_to_json(const Encoder<Real>& encoder);

// Rebuilds the encoder from the config and overwrites each parameter. Names,
// shapes and counts must match exactly.
template <typename Real>
Encoder<Real> encoder_from_checkpoint(std::string_view text);

}  // namespace summix
