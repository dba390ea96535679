#pragma once

#include <filesystem>
#include <stdexcept>

#include "lidardrive/tensorgrad/tensor.hpp"

namespace lidardrive::tensorgrad {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary parameter file: "DPW2", u32 version, u32 count, then per
/// parameter u16 name length, name, u8 rank, u32 dims, f32 values. All
/// integers little-endian.
void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params);

/// Loads values into an existing set. Every parameter in `params` must be
/// present with the same shape; unknown names in the file are an error.
void load_checkpoint(const std::filesystem::path& path, ParameterSet& params);

}  // namespace lidardrive::tensorgrad
