#include "stylus/tensor.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stylus {

double Tensor3::norm() const {
  double s = 0.0;
  for (double v : data) s += v * v;
  return std::sqrt(s);
}

bool Tensor3::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Tensor3::shape_str() const {
  std::ostringstream os;
  os << channels << "x" << height << "x" << width;
  return os.str();
}

static void check_same_shape(const Tensor3& a, const Tensor3& b, const char* op) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

Tensor3 operator+(const Tensor3& a, const Tensor3& b) {
  check_same_shape(a, b, "tensor add");
  Tensor3 r = a;
  for (size_t i = 0; i < r.data.size(); ++i) r.data[i] += b.data[i];
  return r;
}

Tensor3 operator-(const Tensor3& a, const Tensor3& b) {
  check_same_shape(a, b, "tensor sub");
  Tensor3 r = a;
  for (size_t i = 0; i < r.data.size(); ++i) r.data[i] -= b.data[i];
  return r;
}

Tensor3 operator*(double s, const Tensor3& a) {
  Tensor3 r = a;
  for (double& v : r.data) v *= s;
  return r;
}

// ----- TNSR -----------------------------------------------------------------

static_assert(sizeof(float) == 4 && sizeof(double) == 8, "TNSR payload assumes IEEE sizes");

void write_tnsr_stream(std::ostream& os, const std::vector<size_t>& dims, const double* values,
                       TnsrDtype dtype) {
  size_t n = 1;
  std::ostringstream hdr;
  hdr << "TNSR v1 " << (dtype == TnsrDtype::f32 ? "f32" : "f64") << " " << dims.size();
  for (size_t d : dims) {
    hdr << " " << d;
    n *= d;
  }
  hdr << "\n";
  os << hdr.str();
  if (dtype == TnsrDtype::f32) {
    std::vector<float> payload(n);
    for (size_t i = 0; i < n; ++i) payload[i] = static_cast<float>(values[i]);
    os.write(reinterpret_cast<const char*>(payload.data()), std::streamsize(n * 4));
  } else {
    os.write(reinterpret_cast<const char*>(values), std::streamsize(n * 8));
  }
}

TnsrData read_tnsr_stream(std::istream& is, const std::string& what) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("missing TNSR header: " + what);
  std::istringstream hs(line);
  std::string magic, ver, dtype;
  size_t ndim = 0;
  hs >> magic >> ver >> dtype >> ndim;
  if (magic != "TNSR" || ver != "v1") throw std::runtime_error("not a TNSR v1 block: " + what);
  TnsrData out;
  if (dtype == "f32")
    out.dtype = TnsrDtype::f32;
  else if (dtype == "f64")
    out.dtype = TnsrDtype::f64;
  else
    throw std::runtime_error("unsupported TNSR dtype '" + dtype + "': " + what);
  size_t n = 1;
  for (size_t i = 0; i < ndim; ++i) {
    size_t d = 0;
    if (!(hs >> d) || d == 0) throw std::runtime_error("bad TNSR dims: " + what);
    out.dims.push_back(d);
    n *= d;
  }
  out.values.resize(n);
  if (out.dtype == TnsrDtype::f32) {
    std::vector<float> payload(n);
    is.read(reinterpret_cast<char*>(payload.data()), std::streamsize(n * 4));
    if (size_t(is.gcount()) != n * 4) throw std::runtime_error("truncated TNSR payload: " + what);
    out.values.assign(payload.begin(), payload.end());
  } else {
    is.read(reinterpret_cast<char*>(out.values.data()), std::streamsize(n * 8));
    if (size_t(is.gcount()) != n * 8) throw std::runtime_error("truncated TNSR payload: " + what);
  }
  return out;
}

void write_tnsr(const std::string& path, const std::vector<size_t>& dims, const double* values,
                TnsrDtype dtype) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  write_tnsr_stream(f, dims, values, dtype);
  if (!f) throw std::runtime_error("short write: " + path);
}

void write_tnsr(const std::string& path, const Tensor3& t) {
  write_tnsr(path, {size_t(t.channels), size_t(t.height), size_t(t.width)}, t.data.data());
}

void write_tnsr(const std::string& path, const Eigen::MatrixXd& m) {
  // row-major on disk
  std::vector<double> buf(size_t(m.rows()) * m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) buf[size_t(r) * m.cols() + c] = m(r, c);
  write_tnsr(path, {size_t(m.rows()), size_t(m.cols())}, buf.data());
}

TnsrData read_tnsr(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  return read_tnsr_stream(f, path);
}

std::string tnsr_header(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(f, line) || line.rfind("TNSR", 0) != 0)
    throw std::runtime_error("not a TNSR file: " + path);
  return line;
}

Eigen::MatrixXd tnsr_to_matrix(const TnsrData& t) {
  if (t.dims.size() != 2) throw std::runtime_error("expected 2-D TNSR");
  Eigen::MatrixXd m(t.dims[0], t.dims[1]);
  for (size_t r = 0; r < t.dims[0]; ++r)
    for (size_t c = 0; c < t.dims[1]; ++c) m(Eigen::Index(r), Eigen::Index(c)) = t.values[r * t.dims[1] + c];
  return m;
}

Tensor3 tnsr_to_tensor3(const TnsrData& t) {
  if (t.dims.size() != 3) throw std::runtime_error("expected 3-D TNSR");
  Tensor3 out(int(t.dims[0]), int(t.dims[1]), int(t.dims[2]));
  out.data = t.values;
  return out;
}

void write_pgm(const std::string& path, const Eigen::MatrixXd& values01) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << "P5\n" << values01.cols() << " " << values01.rows() << "\n255\n";
  // row 0 at the top; callers flip if they want low frequencies at the bottom
  for (Eigen::Index r = 0; r < values01.rows(); ++r) {
    for (Eigen::Index c = 0; c < values01.cols(); ++c) {
      double v = std::min(1.0, std::max(0.0, values01(r, c)));
      unsigned char b = static_cast<unsigned char>(std::lround(v * 255.0));
      f.write(reinterpret_cast<const char*>(&b), 1);
    }
  }
}

}  // namespace stylus
