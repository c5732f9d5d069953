#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "angiokit/preprocess.hpp"
#include "angiokit/raster.hpp"

namespace angiokit::io {

// Formats are chosen from the file extension: .png, .pgm, .pfm (case-insensitive).
enum class Format { png, pgm, pfm };
Format format_for(const std::string& path);

// 8-bit files map k to k / 255. PFM values are read as stored.
GrayImage read_gray(const std::string& path);
ProbabilityMap read_probability(const std::string& path);
// Any nonzero sample is foreground.
BinaryMask read_mask(const std::string& path);

// 8-bit files store round(255 v) after clamping to [0, 1]; masks store 255.
void write_gray(const GrayImage& img, const std::string& path);
void write_probability(const ProbabilityMap& prob, const std::string& path);
void write_mask(const BinaryMask& mask, const std::string& path);

// Three-channel float map ("PF"), channel order as in the stack.
void write_stack(const preprocess::ChannelStack& stack, const std::string& path);
std::array<GrayImage, 3> read_stack(const std::string& path);

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
};

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels;  // row-major
};

// PNG, or binary PPM for a .ppm extension.
void write_rgb(const RgbImage& img, const std::string& path);

// Sidecar holding {"pixel_size_mm": value}.
double read_pixel_size(const std::string& path);
void write_pixel_size(double mm, const std::string& path);

std::string read_text(const std::string& path);
void write_text(const std::string& text, const std::string& path);

}  // namespace angiokit::io
