#include "stylus/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "stylus/rng.hpp"

namespace stylus {

void validate(const DenoiserConfig& cfg) {
  if (cfg.in_channels < 1) throw std::invalid_argument("denoiser: in_channels must be >= 1");
  if (cfg.base_channels < cfg.heads || cfg.base_channels % cfg.heads != 0)
    throw std::invalid_argument("denoiser: base_channels must be a positive multiple of heads");
  if (cfg.depth < 1) throw std::invalid_argument("denoiser: depth must be >= 1");
  if (cfg.time_embed_dim < 2 || cfg.time_embed_dim % 2 != 0)
    throw std::invalid_argument("denoiser: time_embed_dim must be even and >= 2");
  const int blocks = denoiser_block_count(cfg);
  int prev = -1;
  for (int id : cfg.attn_layer_ids) {
    if (id <= prev) throw std::invalid_argument("denoiser: attn_layer_ids must be strictly increasing");
    if (id < 0 || id >= blocks)
      throw std::invalid_argument("denoiser: attn_layer_id out of range [0, 2*depth+1]");
    prev = id;
  }
}

int denoiser_block_count(const DenoiserConfig& cfg) { return 2 * cfg.depth + 2; }

// ----- low-level ops ---------------------------------------------------------

namespace {

// 3x3 convolution, zero padding 1, via im2col + GEMM.
Tensor3 conv3x3(const Tensor3& x, const Eigen::MatrixXd& w, const Eigen::MatrixXd& b, int stride) {
  const int out_ch = int(w.rows());
  const int out_h = (x.height - 1) / stride + 1;
  const int out_w = (x.width - 1) / stride + 1;
  const int n = out_h * out_w;

  Eigen::MatrixXd cols(x.channels * 9, n);
  for (int c = 0; c < x.channels; ++c) {
    const double* plane = x.data.data() + size_t(c) * x.height * x.width;
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx) {
        const int r = (c * 3 + ky) * 3 + kx;
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride + ky - 1;
          for (int ox = 0; ox < out_w; ++ox) {
            const int ix = ox * stride + kx - 1;
            double v = 0.0;
            if (iy >= 0 && iy < x.height && ix >= 0 && ix < x.width) v = plane[iy * x.width + ix];
            cols(r, oy * out_w + ox) = v;
          }
        }
      }
  }
  Eigen::MatrixXd out = w * cols;
  out.colwise() += b.col(0);

  Tensor3 y(out_ch, out_h, out_w);
  for (int c = 0; c < out_ch; ++c)
    for (int i = 0; i < n; ++i) y.data[size_t(c) * n + i] = out(c, i);
  return y;
}

void group_norm_inplace(Tensor3& x, const Eigen::MatrixXd& scale, const Eigen::MatrixXd& shift) {
  int groups = std::min(8, x.channels);
  while (x.channels % groups != 0) --groups;
  const int per = x.channels / groups;
  const size_t plane = size_t(x.height) * x.width;
  const double eps = 1e-5;
  for (int g = 0; g < groups; ++g) {
    double mean = 0.0;
    for (int c = g * per; c < (g + 1) * per; ++c)
      for (size_t i = 0; i < plane; ++i) mean += x.data[size_t(c) * plane + i];
    mean /= double(per * plane);
    double var = 0.0;
    for (int c = g * per; c < (g + 1) * per; ++c)
      for (size_t i = 0; i < plane; ++i) {
        const double d = x.data[size_t(c) * plane + i] - mean;
        var += d * d;
      }
    var /= double(per * plane);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (int c = g * per; c < (g + 1) * per; ++c) {
      const double sc = scale(c, 0) * inv;
      const double sh = shift(c, 0) - mean * sc;
      double* p = x.data.data() + size_t(c) * plane;
      for (size_t i = 0; i < plane; ++i) p[i] = p[i] * sc + sh;
    }
  }
}

void silu_inplace(Tensor3& x) {
  for (double& v : x.data) v = v / (1.0 + std::exp(-v));
}

Tensor3 upsample_nearest(const Tensor3& x, int out_h, int out_w) {
  Tensor3 y(x.channels, out_h, out_w);
  for (int c = 0; c < x.channels; ++c)
    for (int oy = 0; oy < out_h; ++oy) {
      const int iy = std::min(oy / 2, x.height - 1);
      for (int ox = 0; ox < out_w; ++ox) {
        const int ix = std::min(ox / 2, x.width - 1);
        y.at(c, oy, ox) = x.at(c, iy, ix);
      }
    }
  return y;
}

Eigen::VectorXd time_embedding(double t, int dim) {
  Eigen::VectorXd e(dim);
  const int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * double(i) / double(half));
    e(2 * i) = std::sin(t * freq);
    e(2 * i + 1) = std::cos(t * freq);
  }
  return e;
}

// weight init kinds
enum class Init { scaled_gauss, zero, gn_scale, gn_shift };

struct ParamSpec {
  std::string name;
  int rows = 0;
  int cols = 0;
  Init init = Init::scaled_gauss;
  double gain = 1.0;
};

constexpr double kAttnProjGain = 1.0;
constexpr double kAttnOutGain = 0.5;
constexpr double kOutConvGain = 0.25;

void add_res_block(std::vector<ParamSpec>& v, int id, int ch, int temb_dim) {
  const std::string b = "res" + std::to_string(id) + ".";
  v.push_back({b + "gn1.scale", ch, 1, Init::gn_scale, 0.0});
  v.push_back({b + "gn1.shift", ch, 1, Init::gn_shift, 0.0});
  v.push_back({b + "conv1.w", ch, ch * 9, Init::scaled_gauss, 1.0});
  v.push_back({b + "conv1.b", ch, 1, Init::zero, 0.0});
  v.push_back({b + "temb.w", ch, temb_dim, Init::scaled_gauss, 1.0});
  v.push_back({b + "temb.b", ch, 1, Init::zero, 0.0});
  v.push_back({b + "gn2.scale", ch, 1, Init::gn_scale, 0.0});
  v.push_back({b + "gn2.shift", ch, 1, Init::gn_shift, 0.0});
  v.push_back({b + "conv2.w", ch, ch * 9, Init::scaled_gauss, 1.0});
  v.push_back({b + "conv2.b", ch, 1, Init::zero, 0.0});
}

void add_attn_block(std::vector<ParamSpec>& v, int id, int ch) {
  const std::string b = "attn" + std::to_string(id) + ".";
  v.push_back({b + "gn.scale", ch, 1, Init::gn_scale, 0.0});
  v.push_back({b + "gn.shift", ch, 1, Init::gn_shift, 0.0});
  for (const char* nm : {"wq", "wk", "wv"}) {
    v.push_back({b + nm, ch, ch, Init::scaled_gauss, kAttnProjGain});
    v.push_back({b + std::string(nm).substr(1).insert(0, "b"), ch, 1, Init::zero, 0.0});
  }
  v.push_back({b + "wo", ch, ch, Init::scaled_gauss, kAttnOutGain});
  v.push_back({b + "bo", ch, 1, Init::zero, 0.0});
}

}  // namespace

// Fixed parameter order: this is both the seeded-init order and the weight
// file layout.
static std::vector<ParamSpec> describe_params(const DenoiserConfig& cfg) {
  std::vector<ParamSpec> v;
  const auto has_attn = [&](int id) {
    return std::find(cfg.attn_layer_ids.begin(), cfg.attn_layer_ids.end(), id) != cfg.attn_layer_ids.end();
  };
  const auto ch_at_level = [&](int level) { return cfg.base_channels << level; };

  v.push_back({"conv_in.w", cfg.base_channels, cfg.in_channels * 9, Init::scaled_gauss, 1.0});
  v.push_back({"conv_in.b", cfg.base_channels, 1, Init::zero, 0.0});

  int id = 0;
  for (int level = 0; level < cfg.depth; ++level) {  // encoder
    const int ch = ch_at_level(level);
    add_res_block(v, id, ch, cfg.time_embed_dim);
    if (has_attn(id)) add_attn_block(v, id, ch);
    ++id;
    v.push_back({"down" + std::to_string(level) + ".w", ch_at_level(level + 1), ch * 9,
                 Init::scaled_gauss, 1.0});
    v.push_back({"down" + std::to_string(level) + ".b", ch_at_level(level + 1), 1, Init::zero, 0.0});
  }
  for (int k = 0; k < 2; ++k) {  // mid
    const int ch = ch_at_level(cfg.depth);
    add_res_block(v, id, ch, cfg.time_embed_dim);
    if (has_attn(id)) add_attn_block(v, id, ch);
    ++id;
  }
  for (int level = cfg.depth - 1; level >= 0; --level) {  // decoder
    const int ch = ch_at_level(level);
    v.push_back({"up" + std::to_string(level) + ".w", ch, ch_at_level(level + 1) * 9,
                 Init::scaled_gauss, 1.0});
    v.push_back({"up" + std::to_string(level) + ".b", ch, 1, Init::zero, 0.0});
    add_res_block(v, id, ch, cfg.time_embed_dim);
    if (has_attn(id)) add_attn_block(v, id, ch);
    ++id;
  }
  v.push_back({"conv_out.w", cfg.in_channels, cfg.base_channels * 9, Init::scaled_gauss, kOutConvGain});
  v.push_back({"conv_out.b", cfg.in_channels, 1, Init::zero, 0.0});
  return v;
}

ToyDenoiser::ToyDenoiser(const DenoiserConfig& cfg) : cfg_(cfg) {
  validate(cfg_);
  init_from_seed();
}

void ToyDenoiser::init_from_seed() {
  Xoshiro256 rng(cfg_.seed);
  for (const auto& spec : describe_params(cfg_)) {
    Eigen::MatrixXd m(spec.rows, spec.cols);
    switch (spec.init) {
      case Init::scaled_gauss: {
        const double scale = spec.gain / std::sqrt(double(spec.cols));
        for (int r = 0; r < spec.rows; ++r)
          for (int c = 0; c < spec.cols; ++c) m(r, c) = scale * rng.gaussian();
        break;
      }
      case Init::zero:
        m.setZero();
        break;
      case Init::gn_scale:
        for (int r = 0; r < spec.rows; ++r) m(r, 0) = 1.0 + 0.05 * rng.gaussian();
        break;
      case Init::gn_shift:
        for (int r = 0; r < spec.rows; ++r) m(r, 0) = 0.02 * rng.gaussian();
        break;
    }
    params_.emplace(spec.name, std::move(m));
  }
}

const Eigen::MatrixXd& ToyDenoiser::p(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::logic_error("denoiser: unknown parameter " + name);
  return it->second;
}

int ToyDenoiser::block_channels(int block_id) const {
  const int blocks = denoiser_block_count(cfg_);
  if (block_id < 0 || block_id >= blocks) throw std::out_of_range("denoiser: block id out of range");
  if (block_id < cfg_.depth) return cfg_.base_channels << block_id;              // encoder
  if (block_id < cfg_.depth + 2) return cfg_.base_channels << cfg_.depth;        // mid
  const int level = cfg_.depth - 1 - (block_id - cfg_.depth - 2);                // decoder
  return cfg_.base_channels << level;
}

std::vector<int> ToyDenoiser::decoder_attention_layers() const {
  std::vector<int> out;
  for (int id : cfg_.attn_layer_ids)
    if (id >= cfg_.depth + 2) out.push_back(id);
  return out;
}

// res block with timestep conditioning added after the first conv
static Tensor3 res_block(const ToyDenoiser& d, const std::map<std::string, Eigen::MatrixXd>& params,
                         int id, const Tensor3& x, const Eigen::VectorXd& temb);

Tensor3 ToyDenoiser::predict_noise(const Tensor3& z, int t, const AttentionHookSet* hooks) const {
  if (z.channels != cfg_.in_channels)
    throw std::invalid_argument("denoiser: latent has " + std::to_string(z.channels) +
                                " channels, config expects " + std::to_string(cfg_.in_channels));
  if (z.height < (1 << cfg_.depth) || z.width < (1 << cfg_.depth))
    throw std::invalid_argument("denoiser: spatial size too small for depth");

  const Eigen::VectorXd temb = time_embedding(double(t), cfg_.time_embed_dim);
  const auto has_attn = [&](int id) {
    return std::find(cfg_.attn_layer_ids.begin(), cfg_.attn_layer_ids.end(), id) !=
           cfg_.attn_layer_ids.end();
  };

  auto run_res = [&](int id, Tensor3& x) {
    const std::string b = "res" + std::to_string(id) + ".";
    Tensor3 h = x;
    group_norm_inplace(h, p(b + "gn1.scale"), p(b + "gn1.shift"));
    silu_inplace(h);
    h = conv3x3(h, p(b + "conv1.w"), p(b + "conv1.b"), 1);
    const Eigen::VectorXd tb = p(b + "temb.w") * temb + p(b + "temb.b").col(0);
    const size_t plane = size_t(h.height) * h.width;
    for (int c = 0; c < h.channels; ++c) {
      double* ptr = h.data.data() + size_t(c) * plane;
      for (size_t i = 0; i < plane; ++i) ptr[i] += tb(c);
    }
    group_norm_inplace(h, p(b + "gn2.scale"), p(b + "gn2.shift"));
    silu_inplace(h);
    h = conv3x3(h, p(b + "conv2.w"), p(b + "conv2.b"), 1);
    x = x + h;
  };

  auto run_attn = [&](int id, Tensor3& x) {
    const std::string b = "attn" + std::to_string(id) + ".";
    Tensor3 h = x;
    group_norm_inplace(h, p(b + "gn.scale"), p(b + "gn.shift"));
    const int n = h.height * h.width;
    const int ch = h.channels;
    Eigen::MatrixXd tokens(n, ch);
    for (int c = 0; c < ch; ++c)
      tokens.col(c) = Eigen::Map<const Eigen::VectorXd>(h.data.data() + size_t(c) * n, n);
    const Eigen::MatrixXd q = (tokens * p(b + "wq").transpose()).rowwise() + p(b + "bq").col(0).transpose();
    const Eigen::MatrixXd k = (tokens * p(b + "wk").transpose()).rowwise() + p(b + "bk").col(0).transpose();
    const Eigen::MatrixXd v = (tokens * p(b + "wv").transpose()).rowwise() + p(b + "bv").col(0).transpose();
    const Eigen::MatrixXd attn_out = apply_attention_hooks(hooks, id, t, q, k, v, cfg_.heads);
    const Eigen::MatrixXd y = (attn_out * p(b + "wo").transpose()).rowwise() + p(b + "bo").col(0).transpose();
    for (int c = 0; c < ch; ++c)
      Eigen::Map<Eigen::VectorXd>(x.data.data() + size_t(c) * n, n) += y.col(c);
  };

  Tensor3 x = conv3x3(z, p("conv_in.w"), p("conv_in.b"), 1);

  std::vector<Tensor3> skips;
  std::vector<std::pair<int, int>> sizes;
  int id = 0;
  for (int level = 0; level < cfg_.depth; ++level) {
    run_res(id, x);
    if (has_attn(id)) run_attn(id, x);
    ++id;
    skips.push_back(x);
    sizes.emplace_back(x.height, x.width);
    x = conv3x3(x, p("down" + std::to_string(level) + ".w"), p("down" + std::to_string(level) + ".b"), 2);
  }
  for (int k = 0; k < 2; ++k) {
    run_res(id, x);
    if (has_attn(id)) run_attn(id, x);
    ++id;
  }
  for (int level = cfg_.depth - 1; level >= 0; --level) {
    x = upsample_nearest(x, sizes[size_t(level)].first, sizes[size_t(level)].second);
    x = conv3x3(x, p("up" + std::to_string(level) + ".w"), p("up" + std::to_string(level) + ".b"), 1);
    x = x + skips[size_t(level)];
    run_res(id, x);
    if (has_attn(id)) run_attn(id, x);
    ++id;
  }
  return conv3x3(x, p("conv_out.w"), p("conv_out.b"), 1);
}

// ----- weight file -----------------------------------------------------------

static nlohmann::json config_to_json(const DenoiserConfig& c) {
  return {{"in_channels", c.in_channels},   {"base_channels", c.base_channels},
          {"depth", c.depth},               {"attn_layer_ids", c.attn_layer_ids},
          {"heads", c.heads},               {"time_embed_dim", c.time_embed_dim},
          {"seed", c.seed}};
}

static DenoiserConfig config_from_json(const nlohmann::json& j) {
  DenoiserConfig c;
  c.in_channels = j.at("in_channels").get<int>();
  c.base_channels = j.at("base_channels").get<int>();
  c.depth = j.at("depth").get<int>();
  c.attn_layer_ids = j.at("attn_layer_ids").get<std::vector<int>>();
  c.heads = j.at("heads").get<int>();
  c.time_embed_dim = j.at("time_embed_dim").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

static uint64_t blob_checksum(const Eigen::MatrixXd& m) {
  return fnv1a64(m.data(), sizeof(double) * size_t(m.size()));
}

void ToyDenoiser::save_weights(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << "SDNZ v1\n";
  nlohmann::json hdr;
  hdr["config"] = config_to_json(cfg_);
  hdr["params"] = params_.size();
  f << hdr.dump() << "\n";
  for (const auto& spec : describe_params(cfg_)) {
    const Eigen::MatrixXd& m = p(spec.name);
    std::ostringstream cs;
    cs << std::hex << blob_checksum(m);
    f << spec.name << " " << cs.str() << "\n";
    // row-major payload
    std::vector<double> buf(size_t(m.size()));
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) buf[size_t(r) * m.cols() + c] = m(r, c);
    write_tnsr_stream(f, {size_t(m.rows()), size_t(m.cols())}, buf.data(), TnsrDtype::f64);
  }
  if (!f) throw std::runtime_error("short write: " + path);
}

ToyDenoiser ToyDenoiser::load_weights(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string magic;
  std::getline(f, magic);
  if (magic != "SDNZ v1") throw std::runtime_error("not an SDNZ v1 weight file: " + path);
  std::string hdr_line;
  if (!std::getline(f, hdr_line)) throw std::runtime_error("missing weight header: " + path);
  const nlohmann::json hdr = nlohmann::json::parse(hdr_line);

  ToyDenoiser d;
  d.cfg_ = config_from_json(hdr.at("config"));
  validate(d.cfg_);

  const auto specs = describe_params(d.cfg_);
  if (hdr.at("params").get<size_t>() != specs.size())
    throw std::runtime_error("weight file: parameter count does not match config: " + path);

  for (const auto& spec : specs) {
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("weight file: missing blob '" + spec.name + "'");
    std::istringstream ls(line);
    std::string name, cs_hex;
    ls >> name >> cs_hex;
    if (name != spec.name)
      throw std::runtime_error("weight file: expected blob '" + spec.name + "', found '" + name + "'");
    const TnsrData t = read_tnsr_stream(f, "blob '" + name + "'");
    if (t.dims.size() != 2 || int(t.dims[0]) != spec.rows || int(t.dims[1]) != spec.cols)
      throw std::runtime_error("weight file: shape mismatch in blob '" + name + "'");
    Eigen::MatrixXd m(spec.rows, spec.cols);
    for (int r = 0; r < spec.rows; ++r)
      for (int c = 0; c < spec.cols; ++c) m(r, c) = t.values[size_t(r) * spec.cols + c];
    std::ostringstream cs;
    cs << std::hex << blob_checksum(m);
    if (cs.str() != cs_hex)
      throw std::runtime_error("weight file: checksum mismatch in blob '" + name + "'");
    d.params_.emplace(spec.name, std::move(m));
  }
  return d;
}

uint64_t ToyDenoiser::weights_checksum() const {
  uint64_t h = fnv1a64("SDNZ");
  for (const auto& spec : describe_params(cfg_)) {
    const Eigen::MatrixXd& m = p(spec.name);
    h = fnv1a64(spec.name, h);
    h = fnv1a64(m.data(), sizeof(double) * size_t(m.size()), h);
  }
  return h;
}

}  // namespace stylus
