#include "echoforge/report.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>

#include "echoforge/errors.hpp"
#include "echoforge/image.hpp"

namespace echoforge::report {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IngestError("cannot write " + path.string());
  os << std::setprecision(17);
  return os;
}

}  // namespace

void write_folds_csv(const std::filesystem::path& path, const FoldSummary& summary) {
  auto os = open_out(path);
  os << "fold,accuracy,n_test\n";
  for (const auto& f : summary.folds) os << f.name << ',' << f.accuracy << ',' << f.cm.total() << '\n';
  os << "mean," << summary.mean_accuracy << ',' << summary.total.total() << '\n';
}

void write_per_class_csv(const std::filesystem::path& path, const ConfusionMatrix& cm) {
  const auto fpr = false_positive_rate(cm);
  auto os = open_out(path);
  os << "class_index,name,support,correct,recall,fpr\n";
  for (Eigen::Index c = 0; c < cm.counts.rows(); ++c) {
    const long long support = cm.counts.row(c).sum();
    os << c << ',' << cm.names[static_cast<std::size_t>(c)] << ',' << support << ',' << cm.counts(c, c) << ',';
    if (support > 0) os << static_cast<double>(cm.counts(c, c)) / static_cast<double>(support);
    os << ',';
    if (const auto& r = fpr.per_class[static_cast<std::size_t>(c)]) os << *r;
    os << '\n';
  }
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * fraction);
  return buf;
}

nlohmann::json summary_json(const FoldSummary& summary) {
  nlohmann::json j;
  j["mean_accuracy"] = summary.mean_accuracy;
  j["mean_accuracy_display"] = percent(summary.mean_accuracy);
  j["pooled_accuracy"] = summary.total.accuracy();
  const long long n = summary.total.total();
  if (n > 0) {
    const auto fpr = false_positive_rate(summary.total);
    j["macro_fpr"] = fpr.macro;
    j["macro_fpr_display"] = percent(fpr.macro);
    j["fpr_defined_classes"] = fpr.defined_classes;
  }
  j["folds"] = nlohmann::json::array();
  for (const auto& f : summary.folds)
    j["folds"].push_back({{"name", f.name}, {"accuracy", f.accuracy}, {"n_test", f.cm.total()}});
  j["confusion"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < summary.total.counts.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < summary.total.counts.cols(); ++c) row.push_back(summary.total.counts(r, c));
    j["confusion"].push_back(row);
  }
  return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

void write_confusion_png(const std::filesystem::path& path, const ConfusionMatrix& cm) {
  constexpr int cell = 12;
  constexpr int label_w = 80;
  const int n = static_cast<int>(cm.counts.rows());
  const int side = n * cell;
  image::Image img(label_w + side + 4, label_w + side + 4);

  Eigen::MatrixXd norm = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    const double s = static_cast<double>(cm.counts.row(r).sum());
    if (s > 0) norm.row(r) = cm.counts.row(r).cast<double>() / s;
  }
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      img.fill_rect(label_w + c * cell, r * cell, cell, cell, image::colormap(norm(r, c), image::Colormap::Viridis));

  const image::Rgb ink{0, 0, 0};
  for (int g = 0; g < kNumGrasps; ++g) {
    const int off = g * kGesturesPerGrasp * cell;
    if (g > 0) {
      img.fill_rect(label_w + off, 0, 1, side, {255, 255, 255});
      img.fill_rect(label_w, off, side, 1, {255, 255, 255});
    }
    const std::string grasp(GestureLabel::from_parts(static_cast<Grasp>(g), 0).grasp_name().substr(0, 4));
    std::string upper;
    for (char ch : grasp) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    img.draw_text(2, off + 2, upper, ink);
    img.draw_text_vertical(label_w + off + 2, side + label_w - 2, upper, ink);
    for (int k = 0; k < kGesturesPerGrasp; ++k) {
      const std::string idx = std::to_string(k + 1);
      img.draw_text(label_w - 10, off + k * cell + 3, idx, ink);
      img.draw_text(label_w + off + k * cell + 4, side + 2, idx, ink);
    }
  }
  image::write_png(path, img);
}

}  // namespace echoforge::report
