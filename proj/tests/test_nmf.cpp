#include "facedyn/nmf.hpp"

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "facedyn/errors.hpp"
#include "facedyn/ingest.hpp"
#include "facedyn/rng.hpp"
#include "facedyn/synth.hpp"

using namespace facedyn;
namespace nmf = facedyn::nmf;

namespace {

/// Planted model: V = W* x H* with k well-separated non-negative components.
struct Planted {
  Eigen::MatrixXd w;
  Eigen::MatrixXd h;
  Eigen::MatrixXd v;
};

Planted planted_rank(int rank, int cols, std::uint64_t seed,
                     double noise_sd = 0.0) {
  Rng rng(seed);
  Planted p;
  p.w = Eigen::MatrixXd::Zero(kAuCount, rank);
  for (int c = 0; c < rank; ++c) {
    // each component dominated by a distinct block of AUs
    for (int a = 0; a < kAuCount; ++a) {
      const bool in_block = (a % rank) == c;
      p.w(a, c) = in_block ? 0.5 + rng.uniform() : 0.05 * rng.uniform();
    }
  }
  p.h.resize(rank, cols);
  for (int c = 0; c < rank; ++c) {
    for (int j = 0; j < cols; ++j) p.h(c, j) = rng.uniform();
  }
  p.v = p.w * p.h;
  if (noise_sd > 0.0) {
    for (int i = 0; i < p.v.rows(); ++i) {
      for (int j = 0; j < p.v.cols(); ++j) {
        p.v(i, j) = std::max(0.0, p.v(i, j) + noise_sd * rng.normal());
      }
    }
  }
  return p;
}

AuRecording recording_from_columns(const Eigen::MatrixXd& block,
                                   const std::string& id) {
  AuRecording rec;
  rec.video_id = id;
  for (int j = 0; j < block.cols(); ++j) {
    FrameSample f;
    f.frame_index = j;
    for (int a = 0; a < kAuCount; ++a) f.au[a] = block(a, j);
    rec.frames.push_back(f);
  }
  return rec;
}

}  // namespace

TEST_CASE("assemble_v layout") {
  Eigen::MatrixXd block1 = Eigen::MatrixXd::Constant(kAuCount, kFrameTarget, 0.1);
  Eigen::MatrixXd block2 = Eigen::MatrixXd::Constant(kAuCount, kFrameTarget, 0.2);
  block1(0, 0) = 0.77;
  std::vector<AuRecording> recs{recording_from_columns(block1, "a"),
                                recording_from_columns(block2, "b")};
  const auto assembled = nmf::assemble_v(recs);
  CHECK(assembled.v.cols() == 2 * kFrameTarget);
  CHECK(assembled.v(0, 0) == doctest::Approx(0.77));
  CHECK(assembled.v(0, kFrameTarget) == doctest::Approx(0.2));

  SUBCASE("negative entries rejected") {
    recs[0].frames[0].au[0] = -0.01;
    CHECK_THROWS_AS(nmf::assemble_v(recs), DataError);
  }
}

TEST_CASE("nmf_fit exact low-rank recovery") {
  const auto p = planted_rank(1, 300, 5);
  nmf::FitOptions options;
  options.seed = 5;
  options.tol = 1e-9;
  const auto model = nmf::nmf_fit(p.v, 1, options);
  CHECK(model.train_mse < 1e-8);
}

TEST_CASE("nmf_fit determinism") {
  const auto p = planted_rank(3, 200, 6, 0.01);
  nmf::FitOptions options;
  options.seed = 99;
  const auto a = nmf::nmf_fit(p.v, 3, options);
  const auto b = nmf::nmf_fit(p.v, 3, options);
  CHECK((a.w - b.w).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.h - b.h).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.d - b.d).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("nmf_fit on all zeros") {
  Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(kAuCount, 100);
  const auto model = nmf::nmf_fit(zeros, 3);
  CHECK(model.w.cwiseAbs().maxCoeff() == 0.0);
  CHECK(model.h.cwiseAbs().maxCoeff() == 0.0);
  CHECK(model.train_mse == 0.0);
}

TEST_CASE("nmf_fit invariants") {
  const auto p = planted_rank(3, 400, 77, 0.02);
  nmf::FitOptions options;
  options.seed = 13;
  const auto model = nmf::nmf_fit(p.v, 3, options);
  SUBCASE("non-negativity everywhere") {
    CHECK(model.w.minCoeff() >= 0.0);
    CHECK(model.h.minCoeff() >= 0.0);
    CHECK(model.d.minCoeff() > 0.0);
  }
  SUBCASE("unit-max W columns") {
    for (int c = 0; c < model.rank; ++c) {
      CHECK(model.w.col(c).maxCoeff() == doctest::Approx(1.0));
    }
  }
  SUBCASE("rank out of range rejected") {
    CHECK_THROWS_AS(nmf::nmf_fit(p.v, 0), std::invalid_argument);
    CHECK_THROWS_AS(nmf::nmf_fit(p.v, 18), std::invalid_argument);
  }
}

TEST_CASE("nmf objective is non-increasing across iterations") {
  // run several short fits with growing iteration caps; the objective at a
  // larger cap can never exceed the one at a smaller cap (same init)
  const auto p = planted_rank(4, 250, 3, 0.05);
  double prev = 1e300;
  for (int iters : {1, 2, 4, 8, 16, 32, 64}) {
    nmf::FitOptions options;
    options.seed = 21;
    options.max_iter = iters;
    options.tol = 0.0;  // disable early stop
    const auto model = nmf::nmf_fit(p.v, 4, options);
    CHECK(model.train_mse <= prev + 1e-10);
    prev = model.train_mse;
  }
}

TEST_CASE("rank_scan") {
  SUBCASE("planted rank-3 structure") {
    const auto p = planted_rank(3, 400, 12);
    nmf::FitOptions tight;
    tight.tol = 1e-9;
    const auto entries = nmf::rank_scan(p.v, 2, 5, 3, 9, tight);
    REQUIRE(entries.size() == 4);
    CHECK(entries[0].rank == 2);
    CHECK(entries[1].mse < 1e-6);       // k = 3 nails it
    CHECK(entries[0].mse > 100.0 * entries[1].mse);
  }
  SUBCASE("mse non-increasing in rank over random matrices") {
    for (int trial = 0; trial < 10; ++trial) {
      Rng rng(derive_seed(31337, trial));
      Eigen::MatrixXd v(kAuCount, 120);
      for (int i = 0; i < v.rows(); ++i) {
        for (int j = 0; j < v.cols(); ++j) v(i, j) = rng.uniform();
      }
      const auto entries = nmf::rank_scan(v, 2, 6, 2, trial);
      for (std::size_t i = 1; i < entries.size(); ++i) {
        CHECK(entries[i].mse <= entries[i - 1].mse + 1e-9);
      }
    }
  }
  SUBCASE("single-rank scan") {
    const auto p = planted_rank(2, 100, 8);
    const auto entries = nmf::rank_scan(p.v, 3, 3, 2, 4);
    CHECK(entries.size() == 1);
  }
}

TEST_CASE("project_h recovers forward-constructed activations") {
  const auto p = planted_rank(3, 50, 44);
  nmf::FitOptions options;
  options.seed = 44;
  options.tol = 1e-9;
  const auto model = nmf::nmf_fit(p.v, 3, options);

  SUBCASE("columns equal to wd*h0 recover h0") {
    Rng rng(123);
    Eigen::MatrixXd h0(3, 10);
    for (int c = 0; c < 3; ++c) {
      for (int j = 0; j < 10; ++j) h0(c, j) = rng.uniform();
    }
    const Eigen::MatrixXd cols = model.wd() * h0;
    const Eigen::MatrixXd recovered = nmf::project_h(cols, model.w, model.d);
    CHECK((recovered - h0).cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("zero column maps to zero activations") {
    const Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(kAuCount, 1);
    CHECK(nmf::project_h(zeros, model.w, model.d).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("projection of training columns reproduces training H") {
    const Eigen::MatrixXd reprojected = nmf::project_h(p.v, model.w, model.d);
    const Eigen::MatrixXd recon_fit = model.wd() * model.h;
    const Eigen::MatrixXd recon_proj = model.wd() * reprojected;
    CHECK((recon_fit - recon_proj).cwiseAbs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("reconstruction r2") {
  const auto p = planted_rank(3, 200, 71);
  SUBCASE("perfect reconstruction gives 1 per AU") {
    Eigen::MatrixXd identity_wd = p.w;
    const auto r2 = nmf::reconstruction_r2(p.v, identity_wd, p.h);
    for (int a = 0; a < kAuCount; ++a) {
      if (r2.defined[a]) CHECK(r2.per_au[a] == doctest::Approx(1.0));
    }
    CHECK(r2.overall == doctest::Approx(1.0));
  }
  SUBCASE("mean predictor gives r2 of zero") {
    // wd*h constant per AU at the AU mean
    Eigen::MatrixXd wd = Eigen::MatrixXd::Zero(kAuCount, 1);
    for (int a = 0; a < kAuCount; ++a) wd(a, 0) = p.v.row(a).mean();
    const Eigen::MatrixXd h = Eigen::MatrixXd::Ones(1, p.v.cols());
    const auto r2 = nmf::reconstruction_r2(p.v, wd, h);
    for (int a = 0; a < kAuCount; ++a) {
      if (r2.defined[a]) CHECK(r2.per_au[a] == doctest::Approx(0.0).epsilon(1e-9));
    }
  }
  SUBCASE("planted three-component data with small noise stays above 0.9") {
    const auto noisy = planted_rank(3, 400, 99, 0.01);
    nmf::FitOptions options;
    options.seed = 7;
    const auto model = nmf::nmf_fit(noisy.v, 3, options);
    const auto r2 = nmf::reconstruction_r2(noisy.v, model.wd(), model.h);
    CHECK(r2.overall >= 0.9);
  }
}

TEST_CASE("representative AUs") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(kAuCount, 2);
  w(8, 0) = 1.0;   // AU12 peaks component 1
  w(0, 1) = 0.6;   // AU01 and AU02 tie on component 2
  w(1, 1) = 0.6;
  Eigen::VectorXd d = Eigen::VectorXd::Ones(2);
  const auto reps = nmf::representative_aus(w, d);
  CHECK(reps.au_name[0] == "AU12");
  CHECK(reps.au_name[1] == "AU01");  // tie resolves to the lower AU index

  SUBCASE("argmax is invariant to column rescaling") {
    Eigen::MatrixXd scaled = w * 37.5;
    Eigen::VectorXd d2 = d / 37.5;
    const auto reps2 = nmf::representative_aus(scaled, d2);
    CHECK(reps2.au_name == reps.au_name);
  }
}

TEST_CASE("heatmap export") {
  const auto p = planted_rank(3, 120, 15);
  nmf::FitOptions options;
  options.seed = 5;
  const auto model = nmf::nmf_fit(p.v, 3, options);
  const auto csv_text = nmf::basis_heatmap_csv(model);
  // header + 17 AU rows
  CHECK(std::count(csv_text.begin(), csv_text.end(), '\n') == kAuCount + 1);
  CHECK(csv_text.find("AU45") != std::string::npos);

  const auto svg = nmf::basis_heatmap_svg(model);
  CHECK(svg.find("<svg") != std::string::npos);
  // one rect per basis cell
  std::size_t rects = 0, pos = 0;
  while ((pos = svg.find("<rect", pos)) != std::string::npos) {
    ++rects;
    pos += 5;
  }
  CHECK(rects == static_cast<std::size_t>(kAuCount * 3));
}

TEST_CASE("model serialization round-trip") {
  const auto p = planted_rank(3, 60, 2);
  nmf::FitOptions options;
  options.seed = 71;
  const auto model = nmf::nmf_fit(p.v, 3, options);
  const auto text = nmf::serialize_model(model, {"v1", "v2"}, 30);
  const auto loaded = nmf::deserialize_model(text);
  CHECK(loaded.model.rank == 3);
  CHECK(loaded.video_ids == std::vector<std::string>{"v1", "v2"});
  CHECK((loaded.model.w - model.w).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.model.h - model.h).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fit objective is invariant to video ordering") {
  synth::SynthProfile profile;
  profile.n_pairs = 6;
  profile.seed = 3;
  auto dataset = synth::generate_dataset(profile);
  for (auto& rec : dataset.recordings) ingest::smooth_recording(rec);
  const auto params = ingest::fit_normalization(dataset.recordings);
  for (auto& rec : dataset.recordings) ingest::normalize(rec, params, true);

  auto reversed = dataset.recordings;
  std::reverse(reversed.begin(), reversed.end());

  nmf::FitOptions options;
  options.seed = 9;
  const auto a = nmf::nmf_fit(nmf::assemble_v(dataset.recordings).v, 3, options);
  const auto b = nmf::nmf_fit(nmf::assemble_v(reversed).v, 3, options);
  CHECK(std::fabs(a.train_mse - b.train_mse) < 1e-6);
}
