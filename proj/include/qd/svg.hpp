#pragma once

#include <string>
#include <vector>

#include "qd/tracer.hpp"

namespace qd {

/// Minimal SVG writer over a plane window. Coordinates are printed with fixed
/// precision so equal inputs give equal bytes.
class SvgCanvas {
 public:
  SvgCanvas(const Window& window, int width_px = 800, const std::string& title = "");

  double px(Complex z) const noexcept;
  double py(Complex z) const noexcept;

  /// Split at non-finite points and at points outside the window inflated 2x.
  void polyline(const std::vector<Complex>& pts, const std::string& cls);
  void zero_marker(Complex z, int order);
  void pole_marker(Complex z, int order);
  void text(Complex z, const std::string& s, const std::string& cls = "label");

  std::string str() const;
  const Window& window() const noexcept { return window_; }

 private:
  void emit_run(const std::vector<Complex>& run, const std::string& cls);

  Window window_;
  int width_, height_;
  std::string title_;
  std::vector<std::string> body_;
};

std::string xml_escape(const std::string& s);

}  // namespace qd
