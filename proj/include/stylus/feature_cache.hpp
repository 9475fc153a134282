#pragma once

#include <Eigen/Core>
#include <map>
#include <set>
#include <string>
#include <utility>

#include "stylus/codec.hpp"

namespace stylus {

// Attention features gathered at one (timestep, layer) cell during inversion.
struct AttentionFeatures {
  Eigen::MatrixXd q_content;  // [tokens x dim]; empty until captured
  Eigen::MatrixXd k_style, v_style;
  Eigen::MatrixXd k_style_b, v_style_b;
};

// Written single-threaded per branch during inversion, read-only during
// reverse sampling. Content and style writes go to disjoint fields, so the two
// inversions may also fill one cache concurrently.
class FeatureCache {
 public:
  void store_query(int timestep, int layer, const Eigen::MatrixXd& q);
  void store_kv(int timestep, int layer, LatentBranch which, const Eigen::MatrixXd& k,
                const Eigen::MatrixXd& v);

  bool has(int timestep, int layer) const;
  // Throws, naming (timestep, layer), when the cell is missing.
  const AttentionFeatures& at(int timestep, int layer) const;

  // Every (t, layer) needed by injection must exist before sampling starts.
  void require_complete(const std::set<int>& layers, int t_lo, int t_hi, bool need_style_b) const;

  size_t entry_count() const { return cells_.size(); }
  size_t byte_size() const;
  void clear() { cells_.clear(); }

  // On-disk spill: one TNSR file per stored tensor plus a JSON manifest, to
  // bound memory at larger resolutions.
  void spill(const std::string& dir) const;
  static FeatureCache load_spill(const std::string& dir);

 private:
  std::map<std::pair<int, int>, AttentionFeatures> cells_;
};

}  // namespace stylus
