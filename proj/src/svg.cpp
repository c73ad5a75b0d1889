#include "qlustering/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qlustering/errors.hpp"

namespace qlustering::svg {

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Linear blend between a dark blue and a bright yellow.
std::string colour(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(35 + t * (250 - 35)));
  const int g = static_cast<int>(std::lround(40 + t * (230 - 40)));
  const int b = static_cast<int>(std::lround(140 + t * (30 - 140)));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string heatmap(const Eigen::MatrixXd& m, const std::string& title, double lo, double hi) {
  const double margin = 40.0;
  const double side = 480.0;
  const auto rows = m.rows();
  const auto cols = m.cols();
  const double cw = cols > 0 ? side / static_cast<double>(cols) : side;
  const double ch = rows > 0 ? side / static_cast<double>(rows) : side;
  const double span = hi > lo ? hi - lo : 1.0;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(side + 2 * margin)
     << "\" height=\"" << num(side + 2 * margin) << "\">\n";
  os << "<text x=\"" << num(margin) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
     << escape_xml(title) << "</text>\n";
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      os << "<rect x=\"" << num(margin + static_cast<double>(j) * cw) << "\" y=\""
         << num(margin + static_cast<double>(i) * ch) << "\" width=\"" << num(cw)
         << "\" height=\"" << num(ch) << "\" fill=\"" << colour((m(i, j) - lo) / span)
         << "\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string line_plot(const std::vector<double>& y, const std::string& title,
                      const std::string& x_label, const std::string& y_label) {
  const double margin = 50.0;
  const double w = 560.0;
  const double h = 320.0;
  double lo = 0.0;
  double hi = 1.0;
  if (!y.empty()) {
    const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
    lo = *mn;
    hi = *mx;
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  const double n = y.size() > 1 ? static_cast<double>(y.size() - 1) : 1.0;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w + 2 * margin)
     << "\" height=\"" << num(h + 2 * margin) << "\">\n";
  os << "<text x=\"" << num(margin) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
     << escape_xml(title) << "</text>\n";
  os << "<rect x=\"" << num(margin) << "\" y=\"" << num(margin) << "\" width=\"" << num(w)
     << "\" height=\"" << num(h) << "\" fill=\"none\" stroke=\"#888\"/>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double px = margin + w * static_cast<double>(k) / n;
    const double py = margin + h * (1.0 - (y[k] - lo) / (hi - lo));
    os << num(px) << ',' << num(py) << ' ';
  }
  os << "\"/>\n";
  os << "<text x=\"" << num(margin + w / 2) << "\" y=\"" << num(h + margin + 35)
     << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
     << escape_xml(x_label) << "</text>\n";
  os << "<text x=\"14\" y=\"" << num(margin + h / 2)
     << "\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 "
     << num(margin + h / 2) << ")\" text-anchor=\"middle\">" << escape_xml(y_label)
     << "</text>\n";
  os << "<text x=\"" << num(margin - 4) << "\" y=\"" << num(margin + 4)
     << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << num(hi)
     << "</text>\n";
  os << "<text x=\"" << num(margin - 4) << "\" y=\"" << num(margin + h)
     << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << num(lo)
     << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write(const std::filesystem::path& path, const std::string& document) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << document;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace qlustering::svg
