#pragma once

#include <filesystem>
#include <string>

#include "homog/tensors.hpp"

namespace homog {

inline constexpr const char* kCoeffsSchema = "homog-coeffs/1";

// Deterministic JSON text (sorted keys, round-trip doubles).
std::string coefficients_to_json(const EffectiveCoefficients& c);
// Throws SchemaError on an unknown schema tag or malformed content.
EffectiveCoefficients coefficients_from_json(const std::string& text);

void save_coefficients(const EffectiveCoefficients& c, const std::filesystem::path& path);
EffectiveCoefficients load_coefficients(const std::filesystem::path& path);

}  // namespace homog
