#ifndef CINEDIFF_TENSORIO_HPP
#define CINEDIFF_TENSORIO_HPP

// Binary tensor ("CTNS") and network weight ("CDWT") containers. Both are
// little-endian regardless of host and are the exchange format with the
// Python trainer.
//
// CTNS layout:
//   "CTNS" | u16 version | u8 dtype | u8 ndim | ndim x u64 shape | payload
// CDWT layout:
//   "CDWT" | u16 version | u32 header_len | header_len bytes of UTF-8 JSON |
//   concatenated f32 blobs
// The JSON header is an ordered array of {"name", "shape", "offset"} where
// offset is the byte offset of the layer's blob from the end of the header.

#include "cinediff/volume.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace cinediff {

class SamplingMask;

namespace tensorio {

inline constexpr std::uint16_t kTensorVersion = 1;
inline constexpr std::uint16_t kWeightsVersion = 1;

enum class DType : std::uint8_t { F32 = 0, C64 = 1, U8 = 2 };

std::size_t element_size(DType dtype);

class TensorIoError : public std::runtime_error {
 public:
  enum class Kind { Io, BadMagic, VersionMismatch, UnsupportedDtype, Truncated, LengthMismatch, EmptyShape };
  TensorIoError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class WeightsError : public std::runtime_error {
 public:
  enum class Kind { Io, BadMagic, VersionMismatch, BadHeader, Truncated, MissingLayer, UnknownLayer,
                    DuplicateLayer, ShapeMismatch, OverlappingOffsets, NonContiguous };
  WeightsError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

using Shape = std::vector<std::uint64_t>;

struct Tensor {
  Shape shape;
  std::variant<std::vector<float>, std::vector<std::complex<float>>, std::vector<std::uint8_t>> values;

  DType dtype() const { return static_cast<DType>(values.index()); }
  std::uint64_t numel() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::uint64_t numel(const Shape& shape);

std::vector<std::byte> encode_tensor(const Tensor& tensor);
Tensor decode_tensor(std::span<const std::byte> bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor read_tensor(const std::filesystem::path& path);

// Conversions between domain stacks and tensors. Real volumes are stored as
// f32 [T, H, W]; complex stacks as c64 [N, H, W]; masks as u8 [T, H].
Tensor to_tensor(const Cine& volume);
Tensor to_tensor(const ComplexVolume& volume);
Tensor to_tensor(const std::vector<ComplexVolume>& coils);  // c64 [C, T, H, W]
Tensor to_tensor(const SamplingMask& mask);
Cine to_cine(const Tensor& tensor);
ComplexVolume to_complex_volume(const Tensor& tensor);
std::vector<ComplexVolume> to_coil_stack(const Tensor& tensor);

// Weights.
struct Layer {
  std::vector<std::int64_t> shape;
  std::vector<float> values;

  friend bool operator==(const Layer&, const Layer&) = default;
};

using WeightsMap = std::map<std::string, Layer>;

struct LayerSpec {
  std::string name;
  std::vector<std::int64_t> shape;
};

std::vector<std::byte> encode_weights(const WeightsMap& weights, std::span<const LayerSpec> table);
WeightsMap decode_weights(std::span<const std::byte> bytes, std::span<const LayerSpec> table);

void save_weights(const std::filesystem::path& path, const WeightsMap& weights,
                  std::span<const LayerSpec> table);
WeightsMap load_weights(const std::filesystem::path& path, std::span<const LayerSpec> table);

// Sum of a layer's f32 values accumulated in double, used to compare a
// weights file across implementations.
double layer_checksum(const Layer& layer);

std::vector<std::byte> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace tensorio
}  // namespace cinediff

#endif  // CINEDIFF_TENSORIO_HPP
