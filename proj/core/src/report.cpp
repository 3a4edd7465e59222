#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "facedyn/csv.hpp"
#include "facedyn/errors.hpp"
#include "facedyn/learn.hpp"
#include "facedyn/nmf.hpp"
#include "facedyn/pipeline.hpp"
#include "json.hpp"

namespace facedyn::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr int kPlotSize = 420;
constexpr int kMargin = 50;

std::string fmt(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", v);
  return buffer;
}

double x_px(double unit) { return kMargin + unit * (kPlotSize - 2 * kMargin); }
double y_px(double unit) {
  return kPlotSize - kMargin - unit * (kPlotSize - 2 * kMargin);
}

void open_plot(std::ostringstream& svg, const std::string& x_label,
               const std::string& y_label) {
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kPlotSize
      << "\" height=\"" << kPlotSize << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes
  svg << "<line x1=\"" << x_px(0) << "\" y1=\"" << y_px(0) << "\" x2=\""
      << x_px(1) << "\" y2=\"" << y_px(0)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << x_px(0) << "\" y1=\"" << y_px(0) << "\" x2=\""
      << x_px(0) << "\" y2=\"" << y_px(1)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << kPlotSize / 2 << "\" y=\"" << kPlotSize - 10
      << "\" font-size=\"12\" text-anchor=\"middle\">" << x_label
      << "</text>\n";
  svg << "<text x=\"14\" y=\"" << kPlotSize / 2
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 "
         "14 "
      << kPlotSize / 2 << ")\">" << y_label << "</text>\n";
}

const char* kPalette[] = {"#1b6ca8", "#c0392b", "#2d8a4e", "#8e44ad"};

}  // namespace

void run_report(const PipelineConfig& config) {
  const fs::path out = fs::path(config.out_dir) / "report";
  fs::create_directories(out);

  // ROC curves for every evaluated model
  {
    std::ostringstream svg;
    open_plot(svg, "false positive rate", "true positive rate");
    svg << "<line x1=\"" << x_px(0) << "\" y1=\"" << y_px(0) << "\" x2=\""
        << x_px(1) << "\" y2=\"" << y_px(1)
        << "\" stroke=\"#999999\" stroke-dasharray=\"4 3\"/>\n";
    int color = 0;
    for (auto algorithm : config.train.algorithms) {
      const auto name = learn::to_string(algorithm);
      const fs::path roc_path =
          fs::path(config.out_dir) / "eval" / ("roc_" + name + ".csv");
      if (!fs::exists(roc_path)) continue;
      const auto table = csv::read_file(roc_path.string());
      svg << "<polyline fill=\"none\" stroke=\""
          << kPalette[color % 4] << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const double fpr = csv::to_double(table.rows[r][1], r, "fpr");
        const double tpr = csv::to_double(table.rows[r][2], r, "tpr");
        svg << fmt(x_px(fpr)) << ',' << fmt(y_px(tpr)) << ' ';
      }
      svg << "\"/>\n";
      svg << "<text x=\"" << x_px(0.62) << "\" y=\""
          << y_px(0.16 - 0.05 * color) << "\" font-size=\"11\" fill=\""
          << kPalette[color % 4] << "\">" << name << "</text>\n";
      ++color;
    }
    svg << "</svg>\n";
    std::ofstream file(out / "roc.svg", std::ios::binary);
    file << svg.str();
  }

  // rank-scan curve, when the scan ran
  {
    const fs::path scan_path =
        fs::path(config.out_dir) / "nmf" / "rank_scan.csv";
    if (fs::exists(scan_path)) {
      const auto table = csv::read_file(scan_path.string());
      std::vector<double> ranks, mses;
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        ranks.push_back(csv::to_double(table.rows[r][0], r, "rank"));
        mses.push_back(csv::to_double(table.rows[r][1], r, "mse"));
      }
      const double mse_hi = *std::max_element(mses.begin(), mses.end());
      const double rank_lo = ranks.front(), rank_hi = ranks.back();
      std::ostringstream svg;
      open_plot(svg, "rank k", "reconstruction MSE");
      svg << "<polyline fill=\"none\" stroke=\"#1b6ca8\" stroke-width=\"1.5\" "
             "points=\"";
      for (std::size_t i = 0; i < ranks.size(); ++i) {
        const double xu = rank_hi > rank_lo
                              ? (ranks[i] - rank_lo) / (rank_hi - rank_lo)
                              : 0.5;
        const double yu = mse_hi > 0.0 ? mses[i] / mse_hi : 0.0;
        svg << fmt(x_px(xu)) << ',' << fmt(y_px(yu)) << ' ';
      }
      svg << "\"/>\n";
      for (std::size_t i = 0; i < ranks.size(); ++i) {
        const double xu = rank_hi > rank_lo
                              ? (ranks[i] - rank_lo) / (rank_hi - rank_lo)
                              : 0.5;
        const double yu = mse_hi > 0.0 ? mses[i] / mse_hi : 0.0;
        svg << "<circle cx=\"" << fmt(x_px(xu)) << "\" cy=\"" << fmt(y_px(yu))
            << "\" r=\"3\" fill=\"#1b6ca8\"/>\n";
        svg << "<text x=\"" << fmt(x_px(xu)) << "\" y=\"" << y_px(0) + 16
            << "\" font-size=\"10\" text-anchor=\"middle\">"
            << static_cast<int>(ranks[i]) << "</text>\n";
      }
      svg << "</svg>\n";
      std::ofstream file(out / "rank_scan.svg", std::ios::binary);
      file << svg.str();
    }
  }

  // basis heatmap re-export next to the other plots
  {
    const fs::path model_path = fs::path(config.out_dir) / "nmf" / "model.json";
    if (fs::exists(model_path)) {
      std::ifstream in(model_path);
      std::ostringstream buffer;
      buffer << in.rdbuf();
      const auto loaded = nmf::deserialize_model(buffer.str());
      std::ofstream file(out / "w_heatmap.svg", std::ios::binary);
      file << nmf::basis_heatmap_svg(loaded.model);
    }
  }

  // headline summary
  {
    nlohmann::ordered_json summary;
    summary["config_hash"] = config_hash(config);
    summary["seed"] = config.seed;
    const fs::path metrics_path =
        fs::path(config.out_dir) / "eval" / "metrics.json";
    if (fs::exists(metrics_path)) {
      std::ifstream in(metrics_path);
      summary["eval"] = nlohmann::json::parse(in);
    }
    const fs::path valence_path =
        fs::path(config.out_dir) / "valence" / "valence_report.json";
    if (fs::exists(valence_path)) {
      std::ifstream in(valence_path);
      summary["valence"] = nlohmann::json::parse(in);
    }
    std::ofstream file(out / "summary.json", std::ios::binary);
    file << summary.dump(2);
  }
}

}  // namespace facedyn::pipeline
