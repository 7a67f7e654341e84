#include "qd/svg.hpp"

#include <cmath>
#include <cstdio>

namespace qd {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  // -0.00 and 0.00 print the same
  if (std::string(buf) == "-0.00") return "0.00";
  return buf;
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

SvgCanvas::SvgCanvas(const Window& window, int width_px, const std::string& title)
    : window_(window), width_(width_px), title_(title) {
  height_ = static_cast<int>(std::lround(width_px * window.height() / window.width()));
  if (height_ < 1) height_ = 1;
}

double SvgCanvas::px(Complex z) const noexcept { return (z.real() - window_.x0) / window_.width() * width_; }
double SvgCanvas::py(Complex z) const noexcept { return (window_.y1 - z.imag()) / window_.height() * height_; }

void SvgCanvas::emit_run(const std::vector<Complex>& run, const std::string& cls) {
  if (run.size() < 2) return;
  std::string s = "<polyline class=\"" + cls + "\" points=\"";
  // Points closer than a quarter pixel to the last emitted one are dropped; the end point is always kept.
  double lx = 0, ly = 0;
  for (std::size_t k = 0; k < run.size(); ++k) {
    const double x = px(run[k]), y = py(run[k]);
    if (k > 0 && k + 1 < run.size() && std::hypot(x - lx, y - ly) < 0.25) continue;
    if (k > 0) s += ' ';
    s += fmt(x) + "," + fmt(y);
    lx = x, ly = y;
  }
  s += "\"/>";
  body_.push_back(std::move(s));
}

void SvgCanvas::polyline(const std::vector<Complex>& pts, const std::string& cls) {
  const Window clip = window_.inflated(2.0);
  std::vector<Complex> run;
  for (const Complex z : pts) {
    if (std::isfinite(z.real()) && std::isfinite(z.imag()) && clip.contains(z)) {
      run.push_back(z);
    } else {
      emit_run(run, cls);
      run.clear();
    }
  }
  emit_run(run, cls);
}

void SvgCanvas::zero_marker(Complex z, int order) {
  if (!window_.contains(z)) return;
  body_.push_back("<circle class=\"zero\" cx=\"" + fmt(px(z)) + "\" cy=\"" + fmt(py(z)) + "\" r=\"" +
                  fmt(3.0 + order) + "\"/>");
}

void SvgCanvas::pole_marker(Complex z, int order) {
  if (!window_.contains(z)) return;
  const double r = 3.0 + std::abs(order);
  const double x = px(z), y = py(z);
  body_.push_back("<path class=\"pole\" d=\"M" + fmt(x - r) + "," + fmt(y - r) + " L" + fmt(x + r) + "," +
                  fmt(y + r) + " M" + fmt(x - r) + "," + fmt(y + r) + " L" + fmt(x + r) + "," + fmt(y - r) +
                  "\"/>");
}

void SvgCanvas::text(Complex z, const std::string& s, const std::string& cls) {
  body_.push_back("<text class=\"" + cls + "\" x=\"" + fmt(px(z)) + "\" y=\"" + fmt(py(z)) + "\">" + xml_escape(s) +
                  "</text>");
}

std::string SvgCanvas::str() const {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<!-- window [" + fmt6(window_.x0) + ", " + fmt6(window_.x1) + "] x [" + fmt6(window_.y0) + ", " +
         fmt6(window_.y1) + "] maps to viewBox 0 0 " + std::to_string(width_) + " " + std::to_string(height_) +
         ":\n     x_px = (x - x0) / (x1 - x0) * " + std::to_string(width_) + "\n     y_px = (y1 - y) / (y1 - y0) * " +
         std::to_string(height_) + "  (imaginary axis points up) -->\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width_) + "\" height=\"" +
         std::to_string(height_) + "\" viewBox=\"0 0 " + std::to_string(width_) + " " + std::to_string(height_) +
         "\">\n";
  if (!title_.empty()) out += "<title>" + xml_escape(title_) + "</title>\n";
  out +=
      "<style>\n"
      "polyline { fill: none; stroke-linejoin: round; }\n"
      ".background { stroke: #b0b0b0; stroke-width: 0.6; }\n"
      ".critical { stroke: #1f4e9c; stroke-width: 1.2; }\n"
      ".short { stroke: #c0392b; stroke-width: 2.6; }\n"
      ".seed { stroke: #2e7d32; stroke-width: 0.8; }\n"
      ".level { stroke: #6a1b9a; stroke-width: 1.4; }\n"
      ".contour { stroke: #555555; stroke-width: 0.8; }\n"
      ".cut { stroke: #c0392b; stroke-width: 1.6; stroke-dasharray: 4 3; }\n"
      ".zero { fill: #000000; }\n"
      ".pole { stroke: #000000; stroke-width: 1.6; fill: none; }\n"
      ".label { font: 12px sans-serif; fill: #333333; }\n"
      "</style>\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width_) + "\" height=\"" + std::to_string(height_) +
         "\" fill=\"#ffffff\"/>\n";
  for (const std::string& line : body_) out += line + "\n";
  out += "</svg>\n";
  return out;
}

}  // namespace qd
