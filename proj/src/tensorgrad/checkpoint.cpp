#include "lidardrive/tensorgrad/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <vector>

namespace lidardrive::tensorgrad {

namespace {

constexpr std::array<char, 4> kMagic{'D', 'P', 'W', '2'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::filesystem::path& path) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) {
    throw CheckpointError(path.string() + ": truncated checkpoint");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("cannot open " + path.string() + " for writing");
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = params[i];
    if (p.name.size() > 0xFFFF) throw CheckpointError("parameter name too long: " + p.name);
    put<std::uint16_t>(os, static_cast<std::uint16_t>(p.name.size()));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put<std::uint8_t>(os, static_cast<std::uint8_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    for (double v : p.value.data()) put<float>(os, static_cast<float>(v));
  }
  if (!os) throw CheckpointError("write failed: " + path.string());
}

void load_checkpoint(const std::filesystem::path& path, ParameterSet& params) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open " + path.string());
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
    throw CheckpointError(path.string() + ": not a parameter checkpoint");
  }
  const auto version = get<std::uint32_t>(is, path);
  if (version != kVersion) {
    throw CheckpointError(path.string() + ": unsupported version " + std::to_string(version));
  }
  const auto count = get<std::uint32_t>(is, path);
  std::map<std::string, Tensor> loaded;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = get<std::uint16_t>(is, path);
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw CheckpointError(path.string() + ": truncated name");
    const auto rank = get<std::uint8_t>(is, path);
    Shape shape(rank);
    for (auto& d : shape) d = get<std::uint32_t>(is, path);
    Tensor t(shape);
    for (auto& v : t.data()) v = get<float>(is, path);
    if (!loaded.emplace(name, std::move(t)).second) {
      throw CheckpointError(path.string() + ": duplicate parameter '" + name + "'");
    }
  }
  for (const auto& [name, t] : loaded) {
    if (!params.find(name)) throw CheckpointError(path.string() + ": unknown parameter '" + name + "'");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    auto it = loaded.find(p.name);
    if (it == loaded.end()) throw CheckpointError(path.string() + ": missing parameter '" + p.name + "'");
    if (it->second.shape() != p.value.shape()) {
      throw CheckpointError(path.string() + ": parameter '" + p.name + "' has shape " +
                            shape_str(it->second.shape()) + ", expected " + shape_str(p.value.shape()));
    }
    p.value = std::move(it->second);
  }
}

}  // namespace lidardrive::tensorgrad
