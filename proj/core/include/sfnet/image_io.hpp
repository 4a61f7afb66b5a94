#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sfnet {

/// Interleaved 8-bit RGB image.
struct ImageRgb8 {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;  // r,g,b per pixel, row-major

    uint8_t& at(int row, int col, int ch) { return pixels[size_t(3 * (row * width + col) + ch)]; }
    uint8_t at(int row, int col, int ch) const {
        return pixels[size_t(3 * (row * width + col) + ch)];
    }
};

/// Single-channel 16-bit image (depth in millimeters).
struct ImageGray16 {
    int width = 0;
    int height = 0;
    std::vector<uint16_t> pixels;  // row-major

    uint16_t& at(int row, int col) { return pixels[size_t(row * width + col)]; }
    uint16_t at(int row, int col) const { return pixels[size_t(row * width + col)]; }
};

// Binary PPM (P6, maxval 255) and binary PGM (P5, maxval 65535 with
// big-endian 16-bit samples). Round trips are exact.
void write_ppm(const std::string& path, const ImageRgb8& img);
ImageRgb8 read_ppm(const std::string& path);
void write_pgm16(const std::string& path, const ImageGray16& img);
ImageGray16 read_pgm16(const std::string& path);

}  // namespace sfnet
