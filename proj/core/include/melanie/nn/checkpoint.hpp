#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "melanie/nn/parameters.hpp"

namespace melanie::nn {

/*
 * Checkpoint container, version 1. A JSON document:
 *
 *   {
 *     "format": "melanie-checkpoint",
 *     "version": 1,
 *     "dims": {"d": 8, "d_s": 8, "M": 48, "hidden": 32},
 *     "seed": 7,
 *     "tensors": {
 *       "X": {"rows": 48, "cols": 8, "data": [...row-major...]},
 *       "W_S": ..., "W_H": ..., "b_H": ...,
 *       "theta.W1": ..., "theta.b1": ..., "theta.W2": ..., "theta.b2": ...,
 *       "w.W1": ..., "w.b1": ..., "w.W2": ..., "w.b2": ...
 *     }
 *   }
 *
 * Doubles are written with round-trip precision, so save/load is exact.
 */
inline constexpr int kCheckpointVersion = 1;

std::string checkpoint_to_string(const ParameterSet& params);
ParameterSet checkpoint_from_string(const std::string& text,
                                    const std::optional<NetworkDims>& expected = std::nullopt);

void save_checkpoint(const std::filesystem::path& file, const ParameterSet& params);
// Throws std::runtime_error when the stored dims differ from `expected`.
ParameterSet load_checkpoint(const std::filesystem::path& file,
                             const std::optional<NetworkDims>& expected = std::nullopt);

}  // namespace melanie::nn
