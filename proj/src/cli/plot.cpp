#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "glyphforge/cli/commands.hpp"

namespace glyphforge::cli {

namespace {

constexpr double kPanelW = 420.0;
constexpr double kPanelH = 300.0;
constexpr double kMarginL = 60.0;
constexpr double kMarginT = 40.0;
constexpr double kPlotW = kPanelW - kMarginL - 20.0;
constexpr double kPlotH = kPanelH - kMarginT - 50.0;

const char* split_color(dataset::Split s) {
  switch (s) {
    case dataset::Split::train: return "#1f77b4";
    case dataset::Split::val: return "#ff7f0e";
    case dataset::Split::test: return "#2ca02c";
  }
  return "#000000";
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

[[noreturn]] void bad_row(std::size_t row, const std::string& what) {
  throw FormatError("metrics CSV row " + std::to_string(row) + ": " + what);
}

double parse_double(std::size_t row, const std::string& field, const char* name) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size() || !std::isfinite(v)) {
    bad_row(row, std::string("bad ") + name + " '" + field + "'");
  }
  return v;
}

}  // namespace

std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) bad_row(1, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "epoch,split,loss,accuracy") bad_row(1, "expected header 'epoch,split,loss,accuracy'");
  std::vector<MetricsRow> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 4) bad_row(row, "expected 4 fields, got " + std::to_string(fields.size()));
    MetricsRow r;
    const double epoch = parse_double(row, fields[0], "epoch");
    if (epoch < 0 || epoch != std::floor(epoch)) bad_row(row, "bad epoch '" + fields[0] + "'");
    r.epoch = static_cast<std::size_t>(epoch);
    const auto split = dataset::parse_split(fields[1]);
    if (!split) bad_row(row, "bad split '" + fields[1] + "'");
    r.split = *split;
    r.loss = parse_double(row, fields[2], "loss");
    r.accuracy = parse_double(row, fields[3], "accuracy");
    if (r.accuracy < 0.0 || r.accuracy > 1.0) bad_row(row, "accuracy outside [0, 1]");
    rows.push_back(r);
  }
  if (rows.empty()) bad_row(row, "no data rows");
  return rows;
}

std::string render_metrics_svg(const std::vector<MetricsRow>& rows) {
  std::size_t max_epoch = 1;
  double max_loss = 0.0;
  for (const auto& r : rows) {
    max_epoch = std::max(max_epoch, r.epoch);
    max_loss = std::max(max_loss, r.loss);
  }
  if (max_loss <= 0.0) max_loss = 1.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * kPanelW << "\" height=\"" << kPanelH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const auto x_of = [&](std::size_t epoch, double ox) {
    const double t = max_epoch <= 1 ? 0.5 : static_cast<double>(epoch - 1) / static_cast<double>(max_epoch - 1);
    return ox + kMarginL + t * kPlotW;
  };

  for (int panel = 0; panel < 2; ++panel) {
    const bool acc = panel == 0;
    const double ox = panel * kPanelW;
    const double top = kMarginT;
    const double bottom = kMarginT + kPlotH;
    const double y_max = acc ? 1.0 : max_loss;
    const auto y_of = [&](double v) { return bottom - (v / y_max) * kPlotH; };
    svg << "<g class=\"panel\" id=\"" << (acc ? "accuracy" : "loss") << "\">\n";
    svg << "<text x=\"" << num(ox + kPanelW / 2) << "\" y=\"20\" text-anchor=\"middle\">"
        << (acc ? "Accuracy" : "Loss") << "</text>\n";
    svg << "<line x1=\"" << num(ox + kMarginL) << "\" y1=\"" << num(bottom) << "\" x2=\""
        << num(ox + kMarginL + kPlotW) << "\" y2=\"" << num(bottom) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << num(ox + kMarginL) << "\" y1=\"" << num(top) << "\" x2=\"" << num(ox + kMarginL)
        << "\" y2=\"" << num(bottom) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(ox + kMarginL + kPlotW / 2) << "\" y=\"" << num(bottom + 35)
        << "\" text-anchor=\"middle\">epoch</text>\n";
    svg << "<text x=\"" << num(ox + 15) << "\" y=\"" << num(top + kPlotH / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 "
        << num(ox + 15) << ' ' << num(top + kPlotH / 2) << ")\">" << (acc ? "accuracy" : "loss") << "</text>\n";
    svg << "<text x=\"" << num(ox + kMarginL - 5) << "\" y=\"" << num(top + 4) << "\" text-anchor=\"end\">"
        << format_metric(y_max) << "</text>\n";
    svg << "<text x=\"" << num(ox + kMarginL - 5) << "\" y=\"" << num(bottom + 4) << "\" text-anchor=\"end\">0</text>\n";
    svg << "<text x=\"" << num(ox + kMarginL) << "\" y=\"" << num(bottom + 16) << "\" text-anchor=\"middle\">1</text>\n";
    svg << "<text x=\"" << num(ox + kMarginL + kPlotW) << "\" y=\"" << num(bottom + 16) << "\" text-anchor=\"middle\">"
        << max_epoch << "</text>\n";

    double legend_y = top;
    for (auto split : {dataset::Split::train, dataset::Split::val}) {
      std::vector<const MetricsRow*> pts;
      for (const auto& r : rows) {
        if (r.split == split) pts.push_back(&r);
      }
      if (pts.empty()) continue;
      std::stable_sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->epoch < b->epoch; });
      svg << "<polyline class=\"" << dataset::to_string(split) << "\" fill=\"none\" stroke=\"" << split_color(split)
          << "\" stroke-width=\"2\" points=\"";
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) svg << ' ';
        svg << num(x_of(pts[i]->epoch, ox)) << ',' << num(y_of(acc ? pts[i]->accuracy : pts[i]->loss));
      }
      svg << "\"/>\n";
      svg << "<text x=\"" << num(ox + kPanelW - 70) << "\" y=\"" << num(legend_y + 12) << "\" fill=\""
          << split_color(split) << "\">" << dataset::to_string(split) << "</text>\n";
      legend_y += 15;
    }
    for (const auto& r : rows) {
      if (r.split != dataset::Split::test) continue;
      svg << "<circle class=\"test\" cx=\"" << num(x_of(r.epoch, ox)) << "\" cy=\""
          << num(y_of(acc ? r.accuracy : r.loss)) << "\" r=\"4\" fill=\"" << split_color(r.split) << "\"/>\n";
      svg << "<text x=\"" << num(ox + kPanelW - 70) << "\" y=\"" << num(legend_y + 12) << "\" fill=\""
          << split_color(r.split) << "\">test</text>\n";
      legend_y += 15;
    }
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void cmd_plot(const std::filesystem::path& metrics, const std::filesystem::path& out) {
  std::ifstream in(metrics);
  if (!in) throw FormatError("cannot open metrics '" + metrics.string() + "'");
  const std::string svg = render_metrics_svg(read_metrics_csv(in));
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  std::ofstream o(out);
  if (!o) throw Error("cannot write '" + out.string() + "'");
  o << svg;
  if (!o) throw Error("failed writing '" + out.string() + "'");
}

}  // namespace glyphforge::cli
