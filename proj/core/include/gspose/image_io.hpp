#pragma once

#include <string>
#include <vector>

#include "gspose/image.hpp"

namespace gspose {

/// Decodes an 8-bit PNG to an RGB image in [0,1] (values / 255). Gray and
/// RGBA inputs are expanded/flattened to RGB.
Image load_png(const std::string& path);

/// Encodes an image (1 or 3 channels) as an 8-bit PNG, round(v * 255).
void save_png(const Image& image, const std::string& path);

/// Loads an 8-bit PNG as a binary mask: pixels >= 128 are 1.
BinaryMask load_mask_png(const std::string& path);

/// Writes a mask as an 8-bit gray PNG with values 0 / 255.
void save_mask_png(const BinaryMask& mask, const std::string& path);

/// Writes a single-channel image as a 32-bit float map in PFM layout
/// ("Pf", little-endian, top-down row order via negative scale).
void save_float_pfm(const Image& image, const std::string& path);

/// Raw little-endian float32 matrix, row-major n x dim.
std::vector<std::vector<double>> load_f32_matrix(const std::string& path, int dim);
void save_f32_matrix(const std::vector<std::vector<double>>& rows, const std::string& path);

}  // namespace gspose
