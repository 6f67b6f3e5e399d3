#pragma once

#include <string>

#include "relight/image.hpp"

namespace relight {

// Reads a PNG (8- or 16-bit, any color type) or binary PPM (P6) file into a
// three-channel image with samples normalized to [0, 1]. Grayscale sources are
// broadcast to three identical channels; alpha is dropped.
//
// Throws IoError when the file cannot be opened, UnsupportedFormatError when
// the magic bytes match neither format, and FormatError when the file is
// recognized but corrupt or truncated.
ColorImage load_image(const std::string& path);

// Writes an 8-bit RGB PNG. Samples are clipped to [0, 1] and quantized with
// round-half-up, so a reloaded image differs from the original by at most
// 1/255 per sample. Throws IoError on any write failure.
void save_image(const ColorImage& img, const std::string& path);

} // namespace relight
