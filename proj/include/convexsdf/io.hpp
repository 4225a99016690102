#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "convexsdf/admm.hpp"
#include "convexsdf/grid.hpp"
#include "convexsdf/models.hpp"

namespace convexsdf {

enum class DType { U8, F64 };

/// Sidecar header of a raw volume. The payload lives at `path`, the header at
/// `path + ".hdr"` as key=value lines (dims, dtype, endian).
struct VolumeHeader {
  std::vector<Index> dims;
  DType dtype = DType::U8;

  GridShape shape() const { return GridShape(std::span<const Index>(dims)); }
  std::size_t payload_bytes() const;
  std::string render() const;
  static VolumeHeader parse(const std::string& text);
};

struct RawVolume {
  VolumeHeader header;
  std::vector<std::uint8_t> payload;
};

std::string header_path(const std::string& path);

/// Reads header and payload; throws on a malformed header, a payload of the
/// wrong length, or dims differing from `expect`.
RawVolume read_raw(const std::string& path, const std::optional<GridShape>& expect = std::nullopt);
void write_raw(const std::string& path, const RawVolume& vol);

/// "64x64" or "32x32x32".
GridShape parse_dims(const std::string& text);
std::string format_dims(const GridShape& shape);

/// Any-dimension field I/O. Files ending in ".pgm" use the binary greymap
/// format (2D only); everything else is raw + sidecar.
ScalarField load_field(const std::string& path, const std::optional<GridShape>& expect = std::nullopt);
void save_field(const std::string& path, const ScalarField& f);
/// Masks are stored as u8 0/1 (0/255 in a greymap); any nonzero value reads as true.
MaskField load_mask(const std::string& path, const std::optional<GridShape>& expect = std::nullopt);
void save_mask(const std::string& path, const MaskField& m);

ScalarField load_image(const std::string& path);
void save_image(const std::string& path, const ScalarField& img);
ScalarField load_volume(const std::string& path);
void save_volume(const std::string& path, const ScalarField& vol);

/// Binary portable greymap (P5). Rows run along axis 0. Values are the stored
/// integers; save requires integers in [0, 255].
ScalarField read_pgm(const std::string& path);
void write_pgm(const std::string& path, const ScalarField& img);

struct LabelMasks {
  MaskField outside;  // value 1, I0
  MaskField inside;   // value 2, I1
};

/// Label raster: 0 unlabeled, 1 background, 2 foreground.
LabelMasks load_labels(const std::string& path, const std::optional<GridShape>& expect = std::nullopt);
void save_labels(const std::string& path, const LabelMasks& labels);

struct RunConfig {
  ModelKind kind = ModelKind::ExactHull;
  SegParams seg;
  HullParams hull;
  AdmmParams admm = AdmmParams::exact_hull_defaults();
  std::string input;
  std::string image;
  std::string labels;
  std::string output;
  std::string diagnostics;
  std::uint64_t seed = 0;

  bool operator==(const RunConfig&) const = default;

  /// key = value lines; doubles use 17 significant digits.
  std::string render() const;
  /// Rejects unknown keys, duplicate keys and malformed values.
  static RunConfig parse(const std::string& text);
};

struct SynthParams {
  double extent = 0.0;  // reference length the shapes scale with; 0 picks the smallest grid extent (3/4 of it in 3D)
  double radius = 0.0;  // disc/ball radius; 0 picks 0.3 * extent
  double gap = 12.0;    // boundary gap of two-discs
};

/// Shape names: disc, ball, plus, L, star, two-discs, box-minus-notch.
std::vector<std::string> synth_shape_names();

/// Rasterized synthetic shape plus uniform outliers. Outliers make up
/// `outlier_fraction` of the returned points and are drawn without
/// replacement from the cells farther than 2 from the shape.
MaskField synth(const std::string& name, const GridShape& shape, double outlier_fraction,
                std::uint64_t seed, const SynthParams& params = {});
/// The shape without outliers.
MaskField synth_shape(const std::string& name, const GridShape& shape, const SynthParams& params = {});
/// Number of outliers synth adds to a shape of `shape_points` cells.
Index outlier_count(Index shape_points, double outlier_fraction);

/// Writes the diagnostics CSV (iter, objective, res_p, res_Q, res_z, dphi).
void write_diagnostics(const std::string& path, const std::vector<IterationRecord>& history);

}  // namespace convexsdf
