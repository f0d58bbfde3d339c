#include "linevec/image.hpp"

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

namespace linevec {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

int pgmNextToken(std::FILE* f) {
  // Skips whitespace and '#' comments, returns a nonnegative integer or -1.
  int c = std::fgetc(f);
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = std::fgetc(f);
    } else if (std::isspace(c)) {
      c = std::fgetc(f);
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c)) return -1;
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = std::fgetc(f);
  }
  return value;
}

IntensityGrid loadPgm(std::FILE* f, const std::string& path) {
  char magic[3] = {0, 0, 0};
  if (std::fread(magic, 1, 2, f) != 2 || magic[0] != 'P' ||
      (magic[1] != '2' && magic[1] != '5')) {
    throw ImageError(path + ": not a P2/P5 PGM file");
  }
  bool binary = magic[1] == '5';
  int w = pgmNextToken(f);
  int h = pgmNextToken(f);
  int maxval = pgmNextToken(f);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
    throw ImageError(path + ": malformed PGM header");
  }
  IntensityGrid grid(w, h, double(maxval));
  if (binary) {
    int bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> row(size_t(w) * bytes);
    for (int y = 0; y < h; ++y) {
      if (std::fread(row.data(), 1, row.size(), f) != row.size()) {
        throw ImageError(path + ": truncated PGM data");
      }
      for (int x = 0; x < w; ++x) {
        grid.at(x, y) = bytes == 1 ? row[x] : row[2 * x] * 256 + row[2 * x + 1];
      }
    }
  } else {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        int v = pgmNextToken(f);
        if (v < 0) throw ImageError(path + ": truncated PGM data");
        grid.at(x, y) = v;
      }
    }
  }
  return grid;
}

IntensityGrid loadPngFile(std::FILE* f, const std::string& path) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw ImageError(path + ": libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw ImageError(path + ": libpng init failed");
  }
  std::vector<std::vector<png_byte>> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageError(path + ": PNG decode error");
  }
  png_init_io(png, f);
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int bitDepth = png_get_bit_depth(png, info);
  int colorType = png_get_color_type(png, info);

  if (colorType == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (colorType == PNG_COLOR_TYPE_GRAY && bitDepth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  bitDepth = png_get_bit_depth(png, info);
  colorType = png_get_color_type(png, info);
  int channels = png_get_channels(png, info);
  size_t rowBytes = png_get_rowbytes(png, info);

  rows.assign(h, std::vector<png_byte>(rowBytes));
  std::vector<png_bytep> rowPtrs(h);
  for (png_uint_32 y = 0; y < h; ++y) rowPtrs[y] = rows[y].data();
  png_read_image(png, rowPtrs.data());
  png_destroy_read_struct(&png, &info, nullptr);

  double imax = bitDepth == 16 ? 65535.0 : 255.0;
  IntensityGrid grid(int(w), int(h), imax);
  auto sample = [&](png_bytep row, int x, int c) -> double {
    if (bitDepth == 16) {
      size_t i = (size_t(x) * channels + c) * 2;
      return row[i] * 256 + row[i + 1];
    }
    return row[size_t(x) * channels + c];
  };
  for (png_uint_32 y = 0; y < h; ++y) {
    for (png_uint_32 x = 0; x < w; ++x) {
      png_bytep row = rows[y].data();
      double v;
      if (channels >= 3) {
        v = std::round(0.299 * sample(row, x, 0) + 0.587 * sample(row, x, 1) +
                       0.114 * sample(row, x, 2));
      } else {
        v = sample(row, x, 0);
      }
      grid.at(int(x), int(y)) = v;
    }
  }
  return grid;
}

void writePng(const std::string& path, int w, int h, int channels,
              const std::vector<unsigned char>& data) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw ImageError(path + ": cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw ImageError(path + ": PNG encode error");
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, w, h, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rowPtrs(h);
  for (int y = 0; y < h; ++y) {
    rowPtrs[y] = const_cast<png_bytep>(data.data() + size_t(y) * w * channels);
  }
  png_write_image(png, rowPtrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

IntensityGrid loadGrayscale(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw ImageError(path + ": cannot open file");
  unsigned char magic[2] = {0, 0};
  if (std::fread(magic, 1, 2, f.get()) != 2) throw ImageError(path + ": empty file");
  std::rewind(f.get());
  IntensityGrid grid;
  if (magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5')) {
    grid = loadPgm(f.get(), path);
  } else if (magic[0] == 0x89 && magic[1] == 'P') {
    grid = loadPngFile(f.get(), path);
  } else {
    throw ImageError(path + ": unsupported format (expected PGM or PNG)");
  }
  if (grid.width < 1 || grid.height < 1) throw ImageError(path + ": zero-size image");
  return grid;
}

IntensityGrid equalizeContrast(const IntensityGrid& grid) {
  // Integer-binned CDF mapping; constant images pass through unchanged.
  int levels = int(std::lround(grid.imax)) + 1;
  std::vector<size_t> hist(levels, 0);
  for (double v : grid.values) {
    int b = std::clamp(int(std::lround(v)), 0, levels - 1);
    ++hist[b];
  }
  std::vector<size_t> cdf(levels, 0);
  size_t acc = 0, cdfMin = 0;
  bool seen = false;
  for (int i = 0; i < levels; ++i) {
    acc += hist[i];
    cdf[i] = acc;
    if (!seen && hist[i] > 0) {
      cdfMin = acc;
      seen = true;
    }
  }
  size_t n = grid.size();
  IntensityGrid out = grid;
  if (n == cdfMin) return out;  // single occupied bin
  double denom = double(n - cdfMin);
  for (size_t i = 0; i < n; ++i) {
    int b = std::clamp(int(std::lround(grid.values[i])), 0, levels - 1);
    out.values[i] = std::round(double(cdf[b] - cdfMin) / denom * grid.imax);
  }
  return out;
}

void savePgm(const IntensityGrid& grid, const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw ImageError(path + ": cannot open for writing");
  int maxval = std::max(1, int(std::lround(grid.imax)));
  if (maxval > 65535) maxval = 65535;
  std::fprintf(f.get(), "P5\n%d %d\n%d\n", grid.width, grid.height, maxval);
  int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> row(size_t(grid.width) * bytes);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      int v = std::clamp(int(std::lround(grid.at(x, y))), 0, maxval);
      if (bytes == 1) {
        row[x] = static_cast<unsigned char>(v);
      } else {
        row[2 * x] = static_cast<unsigned char>(v >> 8);
        row[2 * x + 1] = static_cast<unsigned char>(v & 0xff);
      }
    }
    if (std::fwrite(row.data(), 1, row.size(), f.get()) != row.size()) {
      throw ImageError(path + ": write failed");
    }
  }
}

void savePng(const IntensityGrid& grid, const std::string& path) {
  std::vector<unsigned char> data(grid.size());
  double scale = grid.imax > 0 ? 255.0 / grid.imax : 1.0;
  for (size_t i = 0; i < grid.size(); ++i) {
    data[i] = static_cast<unsigned char>(
        std::clamp(int(std::lround(grid.values[i] * scale)), 0, 255));
  }
  writePng(path, grid.width, grid.height, 1, data);
}

void saveRgbPng(int width, int height, const std::vector<unsigned char>& rgb,
                const std::string& path) {
  if (rgb.size() != size_t(width) * height * 3) {
    throw ImageError(path + ": RGB buffer size mismatch");
  }
  writePng(path, width, height, 3, rgb);
}

}  // namespace linevec
