#include "stylus/feature_cache.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "stylus/tensor.hpp"

namespace stylus {

void FeatureCache::store_query(int timestep, int layer, const Eigen::MatrixXd& q) {
  cells_[{timestep, layer}].q_content = q;
}

void FeatureCache::store_kv(int timestep, int layer, LatentBranch which, const Eigen::MatrixXd& k,
                            const Eigen::MatrixXd& v) {
  auto& cell = cells_[{timestep, layer}];
  if (which == LatentBranch::style) {
    cell.k_style = k;
    cell.v_style = v;
  } else if (which == LatentBranch::style_b) {
    cell.k_style_b = k;
    cell.v_style_b = v;
  } else {
    throw std::invalid_argument("feature cache: key/value capture is for style branches only");
  }
}

bool FeatureCache::has(int timestep, int layer) const { return cells_.count({timestep, layer}) > 0; }

const AttentionFeatures& FeatureCache::at(int timestep, int layer) const {
  auto it = cells_.find({timestep, layer});
  if (it == cells_.end()) {
    std::ostringstream os;
    os << "feature cache: missing entry for (t=" << timestep << ", layer=" << layer << ")";
    throw std::runtime_error(os.str());
  }
  return it->second;
}

void FeatureCache::require_complete(const std::set<int>& layers, int t_lo, int t_hi,
                                    bool need_style_b) const {
  for (int t = t_lo; t <= t_hi; ++t)
    for (int layer : layers) {
      const auto& cell = at(t, layer);
      const bool ok = cell.q_content.size() > 0 && cell.k_style.size() > 0 && cell.v_style.size() > 0 &&
                      (!need_style_b || (cell.k_style_b.size() > 0 && cell.v_style_b.size() > 0));
      if (!ok) {
        std::ostringstream os;
        os << "feature cache: incomplete entry for (t=" << t << ", layer=" << layer << ")";
        throw std::runtime_error(os.str());
      }
    }
}

size_t FeatureCache::byte_size() const {
  size_t n = 0;
  for (const auto& [key, cell] : cells_) {
    (void)key;
    n += sizeof(double) * size_t(cell.q_content.size() + cell.k_style.size() + cell.v_style.size() +
                                 cell.k_style_b.size() + cell.v_style_b.size());
  }
  return n;
}

static const char* kFieldNames[5] = {"q_content", "k_style", "v_style", "k_style_b", "v_style_b"};

static const Eigen::MatrixXd& field(const AttentionFeatures& c, int i) {
  switch (i) {
    case 0: return c.q_content;
    case 1: return c.k_style;
    case 2: return c.v_style;
    case 3: return c.k_style_b;
    default: return c.v_style_b;
  }
}

static Eigen::MatrixXd& field(AttentionFeatures& c, int i) {
  return const_cast<Eigen::MatrixXd&>(field(static_cast<const AttentionFeatures&>(c), i));
}

void FeatureCache::spill(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "stylus-feature-cache-v1";
  auto& entries = manifest["entries"] = nlohmann::json::array();
  for (const auto& [key, cell] : cells_) {
    nlohmann::json e;
    e["timestep"] = key.first;
    e["layer"] = key.second;
    for (int i = 0; i < 5; ++i) {
      const auto& m = field(cell, i);
      if (m.size() == 0) continue;
      std::ostringstream name;
      name << kFieldNames[i] << "_t" << key.first << "_l" << key.second << ".tnsr";
      write_tnsr((fs::path(dir) / name.str()).string(), m);
      e[kFieldNames[i]] = name.str();
    }
    entries.push_back(e);
  }
  std::ofstream f(fs::path(dir) / "manifest.json");
  if (!f) throw std::runtime_error("feature cache: cannot write manifest in " + dir);
  f << manifest.dump(2) << "\n";
}

FeatureCache FeatureCache::load_spill(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream f(fs::path(dir) / "manifest.json");
  if (!f) throw std::runtime_error("feature cache: missing manifest in " + dir);
  nlohmann::json manifest = nlohmann::json::parse(f);
  if (manifest.value("format", "") != "stylus-feature-cache-v1")
    throw std::runtime_error("feature cache: unknown manifest format in " + dir);
  FeatureCache out;
  for (const auto& e : manifest["entries"]) {
    const int t = e.at("timestep").get<int>();
    const int layer = e.at("layer").get<int>();
    auto& cell = out.cells_[{t, layer}];
    for (int i = 0; i < 5; ++i) {
      if (!e.contains(kFieldNames[i])) continue;
      const auto path = (fs::path(dir) / e[kFieldNames[i]].get<std::string>()).string();
      field(cell, i) = tnsr_to_matrix(read_tnsr(path));
    }
  }
  return out;
}

}  // namespace stylus
