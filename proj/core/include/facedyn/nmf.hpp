#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "facedyn/types.hpp"

namespace facedyn::nmf {

struct FitOptions {
  int max_iter = 500;
  double tol = 1e-5;
  std::uint64_t seed = 0;
};

/// V ~ W * diag(d) * H with everything non-negative. Columns of W carry
/// unit maximum; the scale lives in d.
struct NmfModel {
  Eigen::MatrixXd w;  // kAuCount x rank
  Eigen::VectorXd d;  // rank
  Eigen::MatrixXd h;  // rank x columns-of-V
  int rank = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  int iterations = 0;
  double train_mse = 0.0;
  double train_r2 = 0.0;

  Eigen::MatrixXd wd() const { return w * d.asDiagonal(); }
};

struct AssembledV {
  Eigen::MatrixXd v;  // kAuCount x (frames * videos)
  std::vector<std::string> video_ids;
  int frames_per_video = 0;

  /// H (or V) column block belonging to one video.
  Eigen::MatrixXd slice(const Eigen::MatrixXd& m, std::size_t video) const;
};

/// Stacks normalized recordings column-wise, video order then frame order.
/// Throws on negative entries (normalization contract violation).
AssembledV assemble_v(const std::vector<AuRecording>& recordings);

NmfModel nmf_fit(const Eigen::MatrixXd& v, int rank,
                 const FitOptions& options = {});

struct RankScanEntry {
  int rank = 0;
  double mse = 0.0;
};

/// Best-of-restarts MSE per rank. One extra candidate per rank warm-starts
/// from the previous rank's best factors, which keeps the curve
/// non-increasing in k.
std::vector<RankScanEntry> rank_scan(const Eigen::MatrixXd& v, int rank_lo = 2,
                                     int rank_hi = 10, int restarts = 3,
                                     std::uint64_t seed = 0,
                                     const FitOptions& base_options = {});

/// Non-negative least-squares activations for new columns under fixed W, d.
Eigen::MatrixXd project_h(const Eigen::MatrixXd& v_columns,
                          const Eigen::MatrixXd& w, const Eigen::VectorXd& d);

struct ReconstructionR2 {
  double overall = 0.0;
  std::array<double, kAuCount> per_au{};
  std::array<bool, kAuCount> defined{};  // false when the AU has no variance
};

ReconstructionR2 reconstruction_r2(const Eigen::MatrixXd& v,
                                   const Eigen::MatrixXd& wd,
                                   const Eigen::MatrixXd& h);

struct RepresentativeSet {
  std::vector<int> au_index;  // one per component
  std::vector<std::string> au_name;
};

/// The AU with the highest loading per component; ties resolve to the
/// lowest AU index.
RepresentativeSet representative_aus(const Eigen::MatrixXd& w,
                                     const Eigen::VectorXd& d);

/// 17 x k loading table (W scaled by d), AU-labelled rows.
std::string basis_heatmap_csv(const NmfModel& model);

/// Simple standalone SVG heatmap with a monotone color scale.
std::string basis_heatmap_svg(const NmfModel& model);

std::string serialize_model(const NmfModel& model,
                            const std::vector<std::string>& video_ids,
                            int frames_per_video);

struct LoadedModel {
  NmfModel model;
  std::vector<std::string> video_ids;
  int frames_per_video = 0;
};

LoadedModel deserialize_model(const std::string& text);

}  // namespace facedyn::nmf
