#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace echoforge::image {

using Rgb = std::array<std::uint8_t, 3>;

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, top row first

  Image(int w, int h, Rgb fill = {255, 255, 255});
  void set(int x, int y, Rgb c);
  void fill_rect(int x, int y, int w, int h, Rgb c);
  /// Uppercase 5x7 bitmap text; unsupported glyphs render blank.
  void draw_text(int x, int y, std::string_view text, Rgb c, int scale = 1);
  /// Text rotated 90 degrees counter-clockwise, reading bottom to top.
  void draw_text_vertical(int x, int y, std::string_view text, Rgb c, int scale = 1);
};

inline constexpr int kGlyphWidth = 6;  // 5 px glyph + 1 px spacing

enum class Colormap { Gray, Viridis };

Rgb colormap(double t, Colormap map);

/// Linear min/max scaling; matrix row 0 is drawn at the bottom of the image.
Image heatmap(const Eigen::MatrixXd& values, Colormap map = Colormap::Viridis, int scale = 1);

/// 8-bit RGB PNG with no time or text chunks, so output is byte-stable.
void write_png(const std::filesystem::path& path, const Image& img);

}  // namespace echoforge::image
