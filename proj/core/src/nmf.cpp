#include "facedyn/nmf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "facedyn/errors.hpp"
#include "facedyn/parallel.hpp"
#include "facedyn/rng.hpp"
#include "json.hpp"

namespace facedyn::nmf {

namespace {

constexpr double kRidge = 1e-15;
constexpr int kNnlsMaxIter = 100;
constexpr double kNnlsTol = 1e-8;

/// Coordinate-descent NNLS on the normal equations:
/// minimize ||A x - b||^2 s.t. x >= 0, given gram = A'A and grad = A'b - gram*x.
void nnls_cd(const Eigen::MatrixXd& gram, Eigen::VectorXd& grad,
             Eigen::VectorXd& x) {
  const int k = static_cast<int>(x.size());
  double tol = 1.0;
  for (int it = 0; it < kNnlsMaxIter && tol / k > kNnlsTol; ++it) {
    tol = 0.0;
    for (int i = 0; i < k; ++i) {
      const double step = grad(i) / gram(i, i);
      const double updated = std::max(0.0, x(i) + step);
      const double delta = updated - x(i);
      if (delta != 0.0) {
        grad -= gram.col(i) * delta;
        x(i) = updated;
        tol += std::fabs(delta) / (updated + 1e-15);
      }
    }
  }
}

/// One half-step of ALS: solve target (k x n) column-wise against basis
/// (rows x k) for data (rows x n).
void update_factor(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& data,
                   Eigen::MatrixXd& target) {
  Eigen::MatrixXd gram = basis.transpose() * basis;
  gram.diagonal().array() += kRidge;
  parallel_for(static_cast<std::size_t>(target.cols()), [&](std::size_t j) {
    Eigen::VectorXd x = target.col(j);
    Eigen::VectorXd grad = basis.transpose() * data.col(j) - gram * x;
    nnls_cd(gram, grad, x);
    target.col(j) = x;
  });
}

double mse_of(const Eigen::MatrixXd& v, const Eigen::MatrixXd& w,
              const Eigen::MatrixXd& h) {
  return (v - w * h).squaredNorm() / static_cast<double>(v.size());
}

double matrix_correlation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double ma = a.mean(), mb = b.mean();
  const double num = ((a.array() - ma) * (b.array() - mb)).sum();
  const double da = (a.array() - ma).square().sum();
  const double db = (b.array() - mb).square().sum();
  if (da <= 0.0 || db <= 0.0) return 1.0;
  return num / std::sqrt(da * db);
}

NmfModel fit_from(const Eigen::MatrixXd& v, Eigen::MatrixXd w, int rank,
                  const FitOptions& options) {
  NmfModel model;
  model.rank = rank;
  model.seed = options.seed;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(rank, v.cols());

  double prev_mse = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd w_prev = w;
  for (int iter = 0; iter < options.max_iter; ++iter) {
    update_factor(w, v, h);
    Eigen::MatrixXd vt = v.transpose();
    Eigen::MatrixXd wt = w.transpose();
    update_factor(h.transpose(), vt, wt);
    w = wt.transpose();

    const double mse = mse_of(v, w, h);
    model.iterations = iter + 1;
    const double rel_change =
        prev_mse == std::numeric_limits<double>::infinity()
            ? 1.0
            : std::fabs(prev_mse - mse) / std::max(prev_mse, 1e-300);
    const double correlation = iter > 0 ? matrix_correlation(w, w_prev) : 0.0;
    prev_mse = mse;
    w_prev = w;
    if (rel_change < options.tol || correlation > 1.0 - options.tol) {
      model.converged = true;
      break;
    }
  }

  // factor the scale out: unit-max W columns and H rows, product into d
  model.d = Eigen::VectorXd::Ones(rank);
  for (int c = 0; c < rank; ++c) {
    const double w_max = w.col(c).maxCoeff();
    if (w_max > 0.0) {
      w.col(c) /= w_max;
      model.d(c) *= w_max;
    }
    const double h_max = h.row(c).maxCoeff();
    if (h_max > 0.0) {
      h.row(c) /= h_max;
      model.d(c) *= h_max;
    }
  }
  model.w = std::move(w);
  model.h = std::move(h);
  model.train_mse = mse_of(v, model.wd(), model.h);
  const auto r2 = reconstruction_r2(v, model.wd(), model.h);
  model.train_r2 = r2.overall;
  return model;
}

Eigen::MatrixXd random_basis(int rows, int rank, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd w(rows, rank);
  for (int c = 0; c < rank; ++c) {
    for (int r = 0; r < rows; ++r) w(r, c) = rng.uniform();
  }
  return w;
}

}  // namespace

Eigen::MatrixXd AssembledV::slice(const Eigen::MatrixXd& m,
                                  std::size_t video) const {
  return m.middleCols(static_cast<Eigen::Index>(video) * frames_per_video,
                      frames_per_video);
}

AssembledV assemble_v(const std::vector<AuRecording>& recordings) {
  if (recordings.empty()) throw DataError("assemble_v: no recordings");
  AssembledV out;
  out.frames_per_video = static_cast<int>(recordings.front().frames.size());
  out.v.resize(kAuCount,
               static_cast<Eigen::Index>(recordings.size()) *
                   out.frames_per_video);
  Eigen::Index col = 0;
  for (const auto& rec : recordings) {
    if (static_cast<int>(rec.frames.size()) != out.frames_per_video) {
      throw DataError("assemble_v: inconsistent frame count in " +
                      rec.video_id);
    }
    out.video_ids.push_back(rec.video_id);
    for (const auto& frame : rec.frames) {
      for (int a = 0; a < kAuCount; ++a) {
        if (frame.au[a] < 0.0) {
          throw DataError("assemble_v: negative entry in " + rec.video_id +
                          " (recordings must be normalized and shifted)");
        }
        out.v(a, col) = frame.au[a];
      }
      ++col;
    }
  }
  return out;
}

NmfModel nmf_fit(const Eigen::MatrixXd& v, int rank,
                 const FitOptions& options) {
  if (rank < 1 || rank > std::min<Eigen::Index>(v.rows(), v.cols())) {
    throw std::invalid_argument("nmf_fit: rank out of range");
  }
  if (v.minCoeff() < 0.0) {
    throw std::invalid_argument("nmf_fit: V must be non-negative");
  }
  if (v.maxCoeff() == 0.0) {
    NmfModel zero;
    zero.rank = rank;
    zero.seed = options.seed;
    zero.converged = true;
    zero.w = Eigen::MatrixXd::Zero(v.rows(), rank);
    zero.d = Eigen::VectorXd::Ones(rank);
    zero.h = Eigen::MatrixXd::Zero(rank, v.cols());
    return zero;
  }
  return fit_from(
      v, random_basis(static_cast<int>(v.rows()), rank, options.seed), rank,
      options);
}

std::vector<RankScanEntry> rank_scan(const Eigen::MatrixXd& v, int rank_lo,
                                     int rank_hi, int restarts,
                                     std::uint64_t seed,
                                     const FitOptions& base_options) {
  if (rank_lo < 1 || rank_hi < rank_lo) {
    throw std::invalid_argument("rank_scan: bad rank range");
  }
  std::vector<RankScanEntry> entries;
  NmfModel previous_best;
  for (int rank = rank_lo; rank <= rank_hi; ++rank) {
    NmfModel best;
    bool have_best = false;
    for (int restart = 0; restart < restarts; ++restart) {
      FitOptions options = base_options;
      options.seed = derive_seed(seed, static_cast<std::uint64_t>(rank),
                                 static_cast<std::uint64_t>(restart));
      auto model = nmf_fit(v, rank, options);
      if (!have_best || model.train_mse < best.train_mse) {
        best = std::move(model);
        have_best = true;
      }
    }
    if (previous_best.rank > 0) {
      // warm start: previous factors plus one fresh random column
      Eigen::MatrixXd w(v.rows(), rank);
      w.leftCols(previous_best.rank) =
          previous_best.wd();  // undo unit-max so scale carries over
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rank), 0xa11));
      for (int c = previous_best.rank; c < rank; ++c) {
        for (int r = 0; r < static_cast<int>(v.rows()); ++r) {
          w(r, c) = rng.uniform();
        }
      }
      FitOptions options = base_options;
      options.seed = derive_seed(seed, static_cast<std::uint64_t>(rank), 0xa11);
      auto warm = fit_from(v, std::move(w), rank, options);
      if (!have_best || warm.train_mse < best.train_mse) {
        best = std::move(warm);
      }
    }
    entries.push_back({rank, best.train_mse});
    previous_best = std::move(best);
  }
  return entries;
}

Eigen::MatrixXd project_h(const Eigen::MatrixXd& v_columns,
                          const Eigen::MatrixXd& w, const Eigen::VectorXd& d) {
  const Eigen::MatrixXd basis = w * d.asDiagonal();
  Eigen::MatrixXd gram = basis.transpose() * basis;
  gram.diagonal().array() += kRidge;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(w.cols(), v_columns.cols());
  parallel_for(static_cast<std::size_t>(v_columns.cols()), [&](std::size_t j) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(w.cols());
    Eigen::VectorXd grad = basis.transpose() * v_columns.col(j);
    nnls_cd(gram, grad, x);
    h.col(j) = x;
  });
  return h;
}

ReconstructionR2 reconstruction_r2(const Eigen::MatrixXd& v,
                                   const Eigen::MatrixXd& wd,
                                   const Eigen::MatrixXd& h) {
  if (v.rows() != wd.rows() || v.cols() != h.cols()) {
    throw std::invalid_argument("reconstruction_r2: shape mismatch");
  }
  const Eigen::MatrixXd resid = v - wd * h;
  ReconstructionR2 out;
  double ss_res_total = 0.0, ss_tot_total = 0.0;
  for (int a = 0; a < static_cast<int>(v.rows()); ++a) {
    const double row_mean = v.row(a).mean();
    const double ss_tot = (v.row(a).array() - row_mean).square().sum();
    const double ss_res = resid.row(a).squaredNorm();
    ss_res_total += ss_res;
    ss_tot_total += ss_tot;
    if (a < kAuCount) {
      out.defined[a] = ss_tot > 0.0;
      out.per_au[a] = ss_tot > 0.0
                          ? 1.0 - ss_res / ss_tot
                          : std::numeric_limits<double>::quiet_NaN();
    }
  }
  out.overall = ss_tot_total > 0.0 ? 1.0 - ss_res_total / ss_tot_total : 0.0;
  return out;
}

RepresentativeSet representative_aus(const Eigen::MatrixXd& w,
                                     const Eigen::VectorXd& d) {
  (void)d;  // positive rescaling cannot move a column argmax
  RepresentativeSet set;
  for (int c = 0; c < static_cast<int>(w.cols()); ++c) {
    int best = 0;
    for (int a = 1; a < static_cast<int>(w.rows()); ++a) {
      if (w(a, c) > w(best, c)) best = a;
    }
    set.au_index.push_back(best);
    set.au_name.push_back(kAuNames[best]);
  }
  return set;
}

std::string basis_heatmap_csv(const NmfModel& model) {
  const Eigen::MatrixXd loadings = model.wd();
  std::ostringstream out;
  out << "au";
  for (int c = 0; c < model.rank; ++c) out << ",component" << (c + 1);
  out << '\n';
  for (int a = 0; a < kAuCount; ++a) {
    out << kAuNames[a];
    for (int c = 0; c < model.rank; ++c) out << ',' << loadings(a, c);
    out << '\n';
  }
  return out.str();
}

std::string basis_heatmap_svg(const NmfModel& model) {
  const Eigen::MatrixXd loadings = model.wd();
  const double peak = std::max(1e-12, loadings.maxCoeff());
  const int cell = 28, label_w = 60, label_h = 24;
  const int width = label_w + model.rank * cell + 10;
  const int height = label_h + kAuCount * cell + 10;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  for (int c = 0; c < model.rank; ++c) {
    svg << "<text x=\"" << label_w + c * cell + cell / 2 << "\" y=\"16\" "
        << "font-size=\"11\" text-anchor=\"middle\">C" << (c + 1)
        << "</text>\n";
  }
  for (int a = 0; a < kAuCount; ++a) {
    svg << "<text x=\"4\" y=\"" << label_h + a * cell + cell / 2 + 4
        << "\" font-size=\"11\">" << kAuNames[a] << "</text>\n";
    for (int c = 0; c < model.rank; ++c) {
      const double intensity = loadings(a, c) / peak;
      const int shade = static_cast<int>(255.0 * (1.0 - intensity));
      svg << "<rect x=\"" << label_w + c * cell << "\" y=\""
          << label_h + a * cell << "\" width=\"" << cell << "\" height=\""
          << cell << "\" fill=\"rgb(" << shade << ',' << shade
          << ",255)\" stroke=\"white\"/>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string serialize_model(const NmfModel& model,
                            const std::vector<std::string>& video_ids,
                            int frames_per_video) {
  nlohmann::ordered_json doc;
  doc["rank"] = model.rank;
  doc["seed"] = model.seed;
  doc["converged"] = model.converged;
  doc["iterations"] = model.iterations;
  doc["train_mse"] = model.train_mse;
  doc["train_r2"] = model.train_r2;
  doc["frames_per_video"] = frames_per_video;
  doc["video_ids"] = video_ids;
  auto& w = doc["w"] = nlohmann::ordered_json::array();
  for (int a = 0; a < model.w.rows(); ++a) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int c = 0; c < model.w.cols(); ++c) row.push_back(model.w(a, c));
    w.push_back(row);
  }
  auto& d = doc["d"] = nlohmann::ordered_json::array();
  for (int c = 0; c < model.d.size(); ++c) d.push_back(model.d(c));
  auto& h = doc["h"] = nlohmann::ordered_json::array();
  for (int c = 0; c < model.h.rows(); ++c) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int j = 0; j < model.h.cols(); ++j) row.push_back(model.h(c, j));
    h.push_back(row);
  }
  return doc.dump(2);
}

LoadedModel deserialize_model(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  LoadedModel loaded;
  loaded.model.rank = doc.at("rank").get<int>();
  loaded.model.seed = doc.at("seed").get<std::uint64_t>();
  loaded.model.converged = doc.at("converged").get<bool>();
  loaded.model.iterations = doc.at("iterations").get<int>();
  loaded.model.train_mse = doc.at("train_mse").get<double>();
  loaded.model.train_r2 = doc.at("train_r2").get<double>();
  loaded.frames_per_video = doc.at("frames_per_video").get<int>();
  loaded.video_ids = doc.at("video_ids").get<std::vector<std::string>>();

  const auto& w = doc.at("w");
  loaded.model.w.resize(w.size(), loaded.model.rank);
  for (std::size_t a = 0; a < w.size(); ++a) {
    for (int c = 0; c < loaded.model.rank; ++c) {
      loaded.model.w(static_cast<Eigen::Index>(a), c) = w[a][c].get<double>();
    }
  }
  const auto& d = doc.at("d");
  loaded.model.d.resize(d.size());
  for (std::size_t c = 0; c < d.size(); ++c) {
    loaded.model.d(static_cast<Eigen::Index>(c)) = d[c].get<double>();
  }
  const auto& h = doc.at("h");
  loaded.model.h.resize(h.size(), h.empty() ? 0 : h[0].size());
  for (std::size_t c = 0; c < h.size(); ++c) {
    for (std::size_t j = 0; j < h[c].size(); ++j) {
      loaded.model.h(static_cast<Eigen::Index>(c),
                     static_cast<Eigen::Index>(j)) = h[c][j].get<double>();
    }
  }
  return loaded;
}

}  // namespace facedyn::nmf
