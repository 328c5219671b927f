#ifndef CINEDIFF_VOLUME_HPP
#define CINEDIFF_VOLUME_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace cinediff {

using Index = Eigen::Index;
using cdouble = std::complex<double>;

// A single H x W frame. Row-major so that a frame is one contiguous row of a
// Volume's storage and k-space lines are contiguous rows.
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using RealImage = Image<double>;
using ComplexImage = Image<cdouble>;

// Stack of equally sized frames [frames x rows x cols]. Storage is a
// (frames) x (rows*cols) row-major array, so whole-stack arithmetic is a
// single Eigen expression on data() and frame(t) is a zero-copy map.
template <typename Scalar>
class Volume {
 public:
  using Storage = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using FrameMap = Eigen::Map<Image<Scalar>>;
  using ConstFrameMap = Eigen::Map<const Image<Scalar>>;

  Volume() = default;

  Volume(Index frames, Index rows, Index cols)
      : rows_(rows), cols_(cols), data_(Storage::Zero(frames, rows * cols)) {
    if (frames < 0 || rows < 0 || cols < 0) {
      throw std::invalid_argument("Volume: negative dimension");
    }
  }

  Volume(Index rows, Index cols, Storage data) : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.cols() != rows * cols) {
      throw std::invalid_argument("Volume: storage width " + std::to_string(data_.cols()) +
                                  " != rows*cols " + std::to_string(rows * cols));
    }
  }

  Index frames() const { return data_.rows(); }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index pixels() const { return rows_ * cols_; }
  Index size() const { return data_.size(); }

  FrameMap frame(Index t) { return FrameMap(data_.data() + t * pixels(), rows_, cols_); }
  ConstFrameMap frame(Index t) const { return ConstFrameMap(data_.data() + t * pixels(), rows_, cols_); }

  Storage& data() { return data_; }
  const Storage& data() const { return data_; }

  template <typename Other>
  bool same_shape(const Volume<Other>& other) const {
    return frames() == other.frames() && rows_ == other.rows() && cols_ == other.cols();
  }

  template <typename NewScalar>
  Volume<NewScalar> cast() const {
    return Volume<NewScalar>(rows_, cols_, data_.template cast<NewScalar>());
  }

  friend bool operator==(const Volume& a, const Volume& b) {
    return a.same_shape(b) && (a.data_ == b.data_).all();
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  Storage data_;
};

// Real magnitude-domain video [T x H x W].
using Cine = Volume<double>;
// Complex stack: coil maps [C x H x W] or one coil's k-space [T x H x W].
using ComplexVolume = Volume<cdouble>;

inline void require_same_shape(const auto& a, const auto& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }
}

}  // namespace cinediff

#endif  // CINEDIFF_VOLUME_HPP
