#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace stylus {

// Dense channels-first tensor, row-major within each channel plane.
struct Tensor3 {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(int c, int h, int w) : channels(c), height(h), width(w), data(size_t(c) * h * w, 0.0) {}

  size_t size() const { return data.size(); }
  double& at(int c, int y, int x) { return data[(size_t(c) * height + y) * width + x]; }
  double at(int c, int y, int x) const { return data[(size_t(c) * height + y) * width + x]; }

  bool same_shape(const Tensor3& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }

  // View of one channel plane as a row-major Eigen matrix.
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> plane(int c) {
    return {data.data() + size_t(c) * height * width, height, width};
  }
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> plane(int c) const {
    return {data.data() + size_t(c) * height * width, height, width};
  }

  double norm() const;
  bool all_finite() const;
  std::string shape_str() const;
};

Tensor3 operator+(const Tensor3& a, const Tensor3& b);
Tensor3 operator-(const Tensor3& a, const Tensor3& b);
Tensor3 operator*(double s, const Tensor3& a);

// ----- TNSR tensor file format ---------------------------------------------
// ASCII header line "TNSR v1 <dtype> <ndim> <dims...>\n" followed by a
// little-endian row-major payload. Spectrogram exports use f32; weight blobs
// use f64 so save/load round-trips are bit-exact.

enum class TnsrDtype { f32, f64 };

void write_tnsr(const std::string& path, const std::vector<size_t>& dims, const double* values,
                TnsrDtype dtype = TnsrDtype::f32);
void write_tnsr(const std::string& path, const Tensor3& t);
void write_tnsr(const std::string& path, const Eigen::MatrixXd& m);  // [rows x cols]

struct TnsrData {
  std::vector<size_t> dims;
  std::vector<double> values;
  TnsrDtype dtype = TnsrDtype::f32;
};
TnsrData read_tnsr(const std::string& path);
std::string tnsr_header(const std::string& path);  // header line without payload

// Stream variants, used to pack several named blobs into one container file.
void write_tnsr_stream(std::ostream& os, const std::vector<size_t>& dims, const double* values,
                       TnsrDtype dtype);
TnsrData read_tnsr_stream(std::istream& is, const std::string& what);

Eigen::MatrixXd tnsr_to_matrix(const TnsrData& t);
Tensor3 tnsr_to_tensor3(const TnsrData& t);

// 8-bit PGM rendering of a [0,1] matrix, for eyeballing spectrograms.
void write_pgm(const std::string& path, const Eigen::MatrixXd& values01);

}  // namespace stylus
