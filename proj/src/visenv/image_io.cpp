#include "visenv/render.hpp"

#include <png.h>

#include <bit>
#include <cstdio>
#include <utility>
#include <fstream>
#include <memory>

namespace visenv {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};

static_assert(std::endian::native == std::endian::little, "flow files are written as native LE");

}  // namespace

namespace {

// libpng reports errors by longjmp, so this stays free of C++ objects.
bool encode_png_rows(std::FILE* file, int width, int height, int channels,
                     const std::uint8_t* rgb) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_init_io(png, file);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(rgb + static_cast<std::size_t>(y) * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

void write_png(const std::string& path, int width, int height, int channels,
               const std::vector<std::uint8_t>& pixels) {
  if (channels != 1 && channels != 3) throw std::invalid_argument("png: channels must be 1 or 3");
  if (width < 1 || height < 1 ||
      pixels.size() != static_cast<std::size_t>(width) * height * channels) {
    throw std::invalid_argument("png: pixel buffer size mismatch");
  }
  std::vector<std::uint8_t> rgb = pixels;
  if (channels == 3) {
    for (std::size_t i = 0; i < rgb.size(); i += 3) std::swap(rgb[i], rgb[i + 2]);  // B G R -> R G B
  }
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "wb"));
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  if (!encode_png_rows(file.get(), width, height, channels, rgb.data()) ||
      std::fflush(file.get()) != 0) {
    throw std::runtime_error("png: failed writing " + path);
  }
}

void write_flo(const std::string& path, int width, int height, const std::vector<float>& flow) {
  if (flow.size() != static_cast<std::size_t>(width) * height * 2) {
    throw std::invalid_argument("flo: flow buffer size mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  const std::int32_t w = width, h = height;
  out.write("PIEH", 4);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  out.write(reinterpret_cast<const char*>(flow.data()),
            static_cast<std::streamsize>(flow.size() * sizeof(float)));
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<float> read_flo(const std::string& path, int& width, int& height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  std::int32_t w = 0, h = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  if (!in || std::memcmp(magic, "PIEH", 4) != 0 || w < 1 || h < 1) {
    throw std::runtime_error(path + ": not a flow file");
  }
  std::vector<float> flow(static_cast<std::size_t>(w) * h * 2);
  in.read(reinterpret_cast<char*>(flow.data()), static_cast<std::streamsize>(flow.size() * 4));
  if (!in) throw std::runtime_error(path + ": truncated flow file");
  width = w;
  height = h;
  return flow;
}

}  // namespace visenv
