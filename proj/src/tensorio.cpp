#include "cinediff/tensorio.hpp"

#include "cinediff/phantom.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <numeric>
#include <set>

namespace cinediff::tensorio {

namespace {

constexpr char kTensorMagic[4] = {'C', 'T', 'N', 'S'};
constexpr char kWeightsMagic[4] = {'C', 'D', 'W', 'T'};

class Writer {
 public:
  void bytes(const char* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out_.push_back(static_cast<std::byte>(p[i]));
  }
  template <typename U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
    }
  }
  void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::byte> take() { return std::move(out_); }
  void reserve(std::size_t n) { out_.reserve(n); }

 private:
  std::vector<std::byte> out_;
};

template <typename Error>
class Reader {
 public:
  explicit Reader(std::span<const std::byte> in) : in_(in) {}

  bool has(std::size_t n) const { return in_.size() - pos_ >= n; }
  std::size_t remaining() const { return in_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (!has(n)) {
      throw Error(Error::Kind::Truncated, std::string("truncated while reading ") + what);
    }
  }
  template <typename U>
  U le(const char* what) {
    need(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(std::to_integer<std::uint8_t>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(le<std::uint32_t>(what)); }
  std::span<const std::byte> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::byte> in_;
  std::size_t pos_ = 0;
};

bool magic_matches(std::span<const std::byte> bytes, const char (&magic)[4]) {
  for (int i = 0; i < 4; ++i) {
    if (std::to_integer<char>(bytes[i]) != magic[i]) return false;
  }
  return true;
}

std::string shape_string(const auto& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace

std::size_t element_size(DType dtype) {
  switch (dtype) {
    case DType::F32: return 4;
    case DType::C64: return 8;
    case DType::U8: return 1;
  }
  throw TensorIoError(TensorIoError::Kind::UnsupportedDtype, "unsupported dtype");
}

std::uint64_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::uint64_t{1}, std::multiplies<>());
}

std::uint64_t Tensor::numel() const { return tensorio::numel(shape); }

std::vector<std::byte> encode_tensor(const Tensor& tensor) {
  if (tensor.shape.empty()) {
    throw TensorIoError(TensorIoError::Kind::EmptyShape, "tensor shape must be non-empty");
  }
  if (tensor.shape.size() > 255) {
    throw TensorIoError(TensorIoError::Kind::LengthMismatch, "tensor rank exceeds 255");
  }
  const std::uint64_t n = tensor.numel();
  const std::size_t stored = std::visit([](const auto& v) { return v.size(); }, tensor.values);
  if (stored != n) {
    throw TensorIoError(TensorIoError::Kind::LengthMismatch,
                        "tensor holds " + std::to_string(stored) + " values but shape " +
                            shape_string(tensor.shape) + " needs " + std::to_string(n));
  }

  Writer w;
  w.reserve(8 + 8 * tensor.shape.size() + n * element_size(tensor.dtype()));
  w.bytes(kTensorMagic, 4);
  w.le(kTensorVersion);
  w.le(static_cast<std::uint8_t>(tensor.dtype()));
  w.le(static_cast<std::uint8_t>(tensor.shape.size()));
  for (auto d : tensor.shape) w.le(d);

  std::visit(
      [&](const auto& values) {
        using V = typename std::decay_t<decltype(values)>::value_type;
        for (const V& v : values) {
          if constexpr (std::is_same_v<V, float>) {
            w.f32(v);
          } else if constexpr (std::is_same_v<V, std::complex<float>>) {
            w.f32(v.real());
            w.f32(v.imag());
          } else {
            w.le(v);
          }
        }
      },
      tensor.values);
  return w.take();
}

Tensor decode_tensor(std::span<const std::byte> bytes) {
  using K = TensorIoError::Kind;
  if (bytes.size() < 4 || !magic_matches(bytes, kTensorMagic)) {
    throw TensorIoError(K::BadMagic, "not a CTNS tensor file (bad magic)");
  }
  Reader<TensorIoError> r(bytes.subspan(4));
  const auto version = r.le<std::uint16_t>("version");
  if (version != kTensorVersion) {
    throw TensorIoError(K::VersionMismatch, "tensor file version " + std::to_string(version) +
                                                " unsupported (expected " + std::to_string(kTensorVersion) + ")");
  }
  const auto code = r.le<std::uint8_t>("dtype");
  if (code > 2) {
    throw TensorIoError(K::UnsupportedDtype, "unsupported dtype code " + std::to_string(code));
  }
  const auto dtype = static_cast<DType>(code);
  const auto ndim = r.le<std::uint8_t>("ndim");
  if (ndim == 0) throw TensorIoError(K::EmptyShape, "tensor file has empty shape");

  Tensor t;
  for (int i = 0; i < ndim; ++i) t.shape.push_back(r.le<std::uint64_t>("shape"));
  const std::uint64_t n = t.numel();
  const std::size_t esize = element_size(dtype);
  if (n != 0 && n > r.remaining() / esize) {
    throw TensorIoError(K::Truncated, "payload truncated: shape " + shape_string(t.shape) + " needs " +
                                          std::to_string(n * esize) + " bytes, file has " +
                                          std::to_string(r.remaining()));
  }
  if (r.remaining() != n * esize) {
    throw TensorIoError(K::LengthMismatch, "payload length " + std::to_string(r.remaining()) +
                                               " disagrees with shape " + shape_string(t.shape));
  }

  switch (dtype) {
    case DType::F32: {
      std::vector<float> v(n);
      for (auto& x : v) x = r.f32("payload");
      t.values = std::move(v);
      break;
    }
    case DType::C64: {
      std::vector<std::complex<float>> v(n);
      for (auto& x : v) {
        const float re = r.f32("payload");
        const float im = r.f32("payload");
        x = {re, im};
      }
      t.values = std::move(v);
      break;
    }
    case DType::U8: {
      std::vector<std::uint8_t> v(n);
      for (auto& x : v) x = r.le<std::uint8_t>("payload");
      t.values = std::move(v);
      break;
    }
  }
  return t;
}

std::vector<std::byte> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TensorIoError(TensorIoError::Kind::Io, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw TensorIoError(TensorIoError::Kind::Io, "failed reading " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TensorIoError(TensorIoError::Kind::Io, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw TensorIoError(TensorIoError::Kind::Io, "failed writing " + path.string());
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  write_file(path, encode_tensor(tensor));
}

Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

// ---------------------------------------------------------------------------
// Domain conversions

Tensor to_tensor(const Cine& volume) {
  Tensor t;
  t.shape = {static_cast<std::uint64_t>(volume.frames()), static_cast<std::uint64_t>(volume.rows()),
             static_cast<std::uint64_t>(volume.cols())};
  std::vector<float> v(static_cast<std::size_t>(volume.size()));
  Eigen::Map<Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      v.data(), volume.frames(), volume.pixels()) = volume.data().cast<float>();
  t.values = std::move(v);
  return t;
}

Tensor to_tensor(const ComplexVolume& volume) {
  Tensor t;
  t.shape = {static_cast<std::uint64_t>(volume.frames()), static_cast<std::uint64_t>(volume.rows()),
             static_cast<std::uint64_t>(volume.cols())};
  std::vector<std::complex<float>> v(static_cast<std::size_t>(volume.size()));
  Eigen::Map<Eigen::Array<std::complex<float>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      v.data(), volume.frames(), volume.pixels()) = volume.data().cast<std::complex<float>>();
  t.values = std::move(v);
  return t;
}

Tensor to_tensor(const std::vector<ComplexVolume>& coils) {
  if (coils.empty()) throw std::invalid_argument("to_tensor: empty coil stack");
  Tensor t;
  const auto& first = coils.front();
  t.shape = {coils.size(), static_cast<std::uint64_t>(first.frames()), static_cast<std::uint64_t>(first.rows()),
             static_cast<std::uint64_t>(first.cols())};
  std::vector<std::complex<float>> v;
  v.reserve(coils.size() * static_cast<std::size_t>(first.size()));
  for (const auto& c : coils) {
    require_same_shape(c, first, "to_tensor(coils)");
    for (Index r = 0; r < c.frames(); ++r) {
      for (Index k = 0; k < c.pixels(); ++k) v.push_back(std::complex<float>(c.data()(r, k)));
    }
  }
  t.values = std::move(v);
  return t;
}

Tensor to_tensor(const SamplingMask& mask) {
  Tensor t;
  t.shape = {static_cast<std::uint64_t>(mask.frames()), static_cast<std::uint64_t>(mask.lines())};
  std::vector<std::uint8_t> v;
  v.reserve(t.shape[0] * t.shape[1]);
  for (Index f = 0; f < mask.frames(); ++f) {
    for (Index l = 0; l < mask.lines(); ++l) v.push_back(mask.sampled(f, l) ? 1 : 0);
  }
  t.values = std::move(v);
  return t;
}

namespace {

void expect(const Tensor& t, DType dtype, std::size_t rank, const char* what) {
  if (t.dtype() != dtype || t.shape.size() != rank) {
    throw std::invalid_argument(std::string(what) + ": expected rank-" + std::to_string(rank) +
                                " tensor of dtype " + std::to_string(static_cast<int>(dtype)) + ", got shape " +
                                shape_string(t.shape));
  }
}

}  // namespace

Cine to_cine(const Tensor& t) {
  expect(t, DType::F32, 3, "to_cine");
  const auto& v = std::get<std::vector<float>>(t.values);
  const auto frames = static_cast<Index>(t.shape[0]);
  const auto rows = static_cast<Index>(t.shape[1]);
  const auto cols = static_cast<Index>(t.shape[2]);
  Cine out(frames, rows, cols);
  out.data() = Eigen::Map<const Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                   v.data(), frames, rows * cols)
                   .cast<double>();
  return out;
}

ComplexVolume to_complex_volume(const Tensor& t) {
  expect(t, DType::C64, 3, "to_complex_volume");
  const auto& v = std::get<std::vector<std::complex<float>>>(t.values);
  const auto frames = static_cast<Index>(t.shape[0]);
  const auto rows = static_cast<Index>(t.shape[1]);
  const auto cols = static_cast<Index>(t.shape[2]);
  ComplexVolume out(frames, rows, cols);
  out.data() = Eigen::Map<const Eigen::Array<std::complex<float>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                   v.data(), frames, rows * cols)
                   .cast<cdouble>();
  return out;
}

std::vector<ComplexVolume> to_coil_stack(const Tensor& t) {
  expect(t, DType::C64, 4, "to_coil_stack");
  const auto& v = std::get<std::vector<std::complex<float>>>(t.values);
  const auto coils = static_cast<Index>(t.shape[0]);
  const auto frames = static_cast<Index>(t.shape[1]);
  const auto rows = static_cast<Index>(t.shape[2]);
  const auto cols = static_cast<Index>(t.shape[3]);
  std::vector<ComplexVolume> out;
  out.reserve(static_cast<std::size_t>(coils));
  for (Index c = 0; c < coils; ++c) {
    ComplexVolume vol(frames, rows, cols);
    vol.data() = Eigen::Map<const Eigen::Array<std::complex<float>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                     v.data() + c * frames * rows * cols, frames, rows * cols)
                     .cast<cdouble>();
    out.push_back(std::move(vol));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weights

namespace {

std::uint64_t layer_numel(const std::vector<std::int64_t>& shape) {
  std::uint64_t n = 1;
  for (auto d : shape) {
    if (d < 0) throw WeightsError(WeightsError::Kind::ShapeMismatch, "negative dimension in layer shape");
    n *= static_cast<std::uint64_t>(d);
  }
  return n;
}

const LayerSpec* find_spec(std::span<const LayerSpec> table, const std::string& name) {
  for (const auto& s : table) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

void check_shape(const LayerSpec& spec, const std::vector<std::int64_t>& shape) {
  if (shape != spec.shape) {
    throw WeightsError(WeightsError::Kind::ShapeMismatch, "layer '" + spec.name + "' has shape " +
                                                              shape_string(shape) + ", expected " +
                                                              shape_string(spec.shape));
  }
}

}  // namespace

std::vector<std::byte> encode_weights(const WeightsMap& weights, std::span<const LayerSpec> table) {
  using K = WeightsError::Kind;
  for (const auto& [name, layer] : weights) {
    if (!find_spec(table, name)) throw WeightsError(K::UnknownLayer, "unknown layer '" + name + "'");
  }
  nlohmann::ordered_json header = nlohmann::ordered_json::array();
  std::uint64_t offset = 0;
  for (const auto& spec : table) {
    auto it = weights.find(spec.name);
    if (it == weights.end()) throw WeightsError(K::MissingLayer, "missing layer '" + spec.name + "'");
    check_shape(spec, it->second.shape);
    if (it->second.values.size() != layer_numel(spec.shape)) {
      throw WeightsError(K::ShapeMismatch, "layer '" + spec.name + "' value count disagrees with its shape");
    }
    header.push_back({{"name", spec.name}, {"shape", spec.shape}, {"offset", offset}});
    offset += 4 * it->second.values.size();
  }
  const std::string text = header.dump();

  Writer w;
  w.reserve(10 + text.size() + offset);
  w.bytes(kWeightsMagic, 4);
  w.le(kWeightsVersion);
  w.le(static_cast<std::uint32_t>(text.size()));
  w.bytes(text.data(), text.size());
  for (const auto& spec : table) {
    for (float v : weights.at(spec.name).values) w.f32(v);
  }
  return w.take();
}

WeightsMap decode_weights(std::span<const std::byte> bytes, std::span<const LayerSpec> table) {
  using K = WeightsError::Kind;
  if (bytes.size() < 4 || !magic_matches(bytes, kWeightsMagic)) {
    throw WeightsError(K::BadMagic, "not a CDWT weights file (bad magic)");
  }
  Reader<WeightsError> r(bytes.subspan(4));
  const auto version = r.le<std::uint16_t>("version");
  if (version != kWeightsVersion) {
    throw WeightsError(K::VersionMismatch, "weights file version " + std::to_string(version) + " unsupported");
  }
  const auto header_len = r.le<std::uint32_t>("header length");
  const auto header_bytes = r.take(header_len, "header");
  const std::string text(reinterpret_cast<const char*>(header_bytes.data()), header_bytes.size());

  struct Entry {
    std::string name;
    std::vector<std::int64_t> shape;
    std::uint64_t offset;
    std::uint64_t bytes;
  };
  std::vector<Entry> entries;
  try {
    const auto header = nlohmann::json::parse(text);
    if (!header.is_array()) throw WeightsError(K::BadHeader, "weights header is not a JSON array");
    for (const auto& e : header) {
      Entry entry{e.at("name").get<std::string>(), e.at("shape").get<std::vector<std::int64_t>>(),
                  e.at("offset").get<std::uint64_t>(), 0};
      entry.bytes = 4 * layer_numel(entry.shape);
      entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw WeightsError(K::BadHeader, std::string("malformed weights header: ") + ex.what());
  }

  std::set<std::string> seen;
  for (const auto& e : entries) {
    const LayerSpec* spec = find_spec(table, e.name);
    if (!spec) throw WeightsError(K::UnknownLayer, "unknown layer '" + e.name + "'");
    if (!seen.insert(e.name).second) throw WeightsError(K::DuplicateLayer, "layer '" + e.name + "' appears twice");
    check_shape(*spec, e.shape);
  }
  for (const auto& spec : table) {
    if (!seen.contains(spec.name)) throw WeightsError(K::MissingLayer, "missing layer '" + spec.name + "'");
  }

  std::vector<const Entry*> by_offset;
  for (const auto& e : entries) by_offset.push_back(&e);
  std::ranges::sort(by_offset, {}, &Entry::offset);
  std::uint64_t expected = 0;
  for (const Entry* e : by_offset) {
    if (e->offset < expected) {
      throw WeightsError(K::OverlappingOffsets, "layer '" + e->name + "' at offset " + std::to_string(e->offset) +
                                                    " overlaps the previous layer (ends at " +
                                                    std::to_string(expected) + ")");
    }
    if (e->offset > expected) {
      throw WeightsError(K::NonContiguous, "gap before layer '" + e->name + "' at offset " +
                                               std::to_string(e->offset));
    }
    expected += e->bytes;
  }
  if (r.remaining() < expected) {
    throw WeightsError(K::Truncated, "weights blob truncated: need " + std::to_string(expected) + " bytes, have " +
                                         std::to_string(r.remaining()));
  }
  if (r.remaining() > expected) {
    throw WeightsError(K::NonContiguous, "trailing bytes after last layer blob");
  }
  const auto base = r.take(expected, "blob");

  WeightsMap out;
  for (const auto& e : entries) {
    Reader<WeightsError> lr(base.subspan(e.offset, e.bytes));
    Layer layer{e.shape, std::vector<float>(e.bytes / 4)};
    for (auto& v : layer.values) v = lr.f32("layer blob");
    out.emplace(e.name, std::move(layer));
  }
  return out;
}

void save_weights(const std::filesystem::path& path, const WeightsMap& weights, std::span<const LayerSpec> table) {
  write_file(path, encode_weights(weights, table));
}

WeightsMap load_weights(const std::filesystem::path& path, std::span<const LayerSpec> table) {
  std::vector<std::byte> bytes;
  try {
    bytes = read_file(path);
  } catch (const TensorIoError& ex) {
    throw WeightsError(WeightsError::Kind::Io, ex.what());
  }
  return decode_weights(bytes, table);
}

double layer_checksum(const Layer& layer) {
  double sum = 0.0;
  for (float v : layer.values) sum += static_cast<double>(v);
  return sum;
}

}  // namespace cinediff::tensorio
