#include "facedyn/types.hpp"

#include <numeric>

namespace facedyn {

int au_index(const std::string& name) {
  for (int i = 0; i < kAuCount; ++i) {
    if (name == kAuNames[i]) return i;
  }
  throw std::invalid_argument("unknown AU name: " + name);
}

std::string to_string(Label label) {
  return label == Label::kReal ? "real" : "fake";
}

std::string to_string(Valence valence) {
  switch (valence) {
    case Valence::kPositive: return "positive";
    case Valence::kNegative: return "negative";
    default: return "neutral";
  }
}

Label label_from_string(const std::string& s) {
  if (s == "real") return Label::kReal;
  if (s == "fake") return Label::kFake;
  throw DataError("invalid label '" + s + "' (expected real|fake)");
}

Valence valence_from_string(const std::string& s) {
  if (s == "positive") return Valence::kPositive;
  if (s == "negative") return Valence::kNegative;
  if (s == "neutral") return Valence::kNeutral;
  throw DataError("invalid valence '" + s + "'");
}

std::vector<double> AuRecording::series(int au) const {
  std::vector<double> out(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) out[t] = frames[t].au[au];
  return out;
}

void AuRecording::set_series(int au, const std::vector<double>& values) {
  for (std::size_t t = 0; t < frames.size(); ++t) frames[t].au[au] = values[t];
}

double AuRecording::mean_confidence() const {
  if (frames.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& f : frames) sum += f.confidence;
  return sum / static_cast<double>(frames.size());
}

double AuRecording::mean_success() const {
  if (frames.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& f : frames) sum += f.success;
  return sum / static_cast<double>(frames.size());
}

}  // namespace facedyn
