#pragma once

#include "salflow/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace salflow {

// Frame interchange: one lossless raster per frame, addressed by a printf-style
// pattern with a single zero-padded index (e.g. "frames/frame_%04d.png").
// Saliency sidecars share the index: "frame_0003.png" -> "frame_0003_sal.png".

/// Expands the pattern for one index.
std::string format_index(const std::string& pattern, int index);

/// Sidecar path of a frame file.
std::filesystem::path saliency_sidecar(const std::filesystem::path& frame_path);

/// Indices present on disk for the pattern, ascending. Throws IoError when the
/// pattern matches nothing ("empty sequence") or the indices have a gap.
std::vector<int> list_indices(const std::string& pattern);

/// Reads one raster and normalizes by the container's max code value.
/// Color rasters come back in R, G, B order.
std::vector<Plane> read_raster(const std::filesystem::path& path);

/// Writes 1 or 3 planes (clamped to [0,1]) as an 8- or 16-bit raster.
void write_raster(const std::filesystem::path& path, const std::vector<Plane>& planes,
                  int bit_depth = 8);

/// Loads a sequence. Gray layouts average color sources; saliency layouts read
/// the per-frame sidecars.
ComplementedSequence load_sequence(const std::string& pattern, Layout layout);

/// Writes image channels as 8-bit rasters and the saliency channel (if any) as
/// 16-bit sidecars, indices starting at 0.
void save_sequence(const ComplementedSequence& sequence, const std::string& pattern);

// Two-band float32 flow files ("PIEH" tag, int32 width, int32 height,
// interleaved u,v row-major, little endian).
inline constexpr float kFlowTag = 202021.25f;
/// Components above this magnitude mark unknown pixels.
inline constexpr float kUnknownFlowThreshold = 1e9f;

void save_flow(const FlowFrame& flow, const std::filesystem::path& path);
/// Unknown pixels come back as zero flow with `valid` set to 0.
FlowFrame load_flow(const std::filesystem::path& path, Plane* valid = nullptr);

void save_flow_field(const FlowField& flow, const std::string& pattern);
FlowField load_flow_field(const std::string& pattern);

// Single-band float32 maps: "SALF" tag, int32 width, int32 height, row-major.
void save_map(const Plane& map, const std::filesystem::path& path);
Plane load_map(const std::filesystem::path& path);

/// Writes the lines to a text file, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace salflow
