#pragma once

#include <cstdint>
#include <filesystem>

#include "condaudio/conditions.hpp"
#include "condaudio/dsp.hpp"
#include "condaudio/mat.hpp"

namespace condaudio::data {

// ACND container: magic "ACND", version u16, kind u8, reserved u8, then
// kind-specific little-endian dimensions and an IEEE-754 single-precision
// payload. Contours store values followed by voiced flags (0.0f / 1.0f).
enum class AcndKind : std::uint8_t { pitch = 0, energy = 1, grid = 2, object = 3 };

constexpr std::uint16_t kAcndVersion = 1;

void write_contour(const std::filesystem::path& path, const dsp::Contour& contour,
                   AcndKind kind);
dsp::Contour read_contour(const std::filesystem::path& path, AcndKind* kind_out = nullptr);

void write_grid(const std::filesystem::path& path, const conditions::TimestampGrid& grid);
conditions::TimestampGrid read_grid(const std::filesystem::path& path);

// Generic L x H matrices (class objects, sampled latents).
void write_matrix(const std::filesystem::path& path, const Mat& m);
Mat read_matrix(const std::filesystem::path& path);

}  // namespace condaudio::data
