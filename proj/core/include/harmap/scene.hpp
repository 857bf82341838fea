#ifndef HARMAP_SCENE_HPP
#define HARMAP_SCENE_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "harmap/fft.hpp"
#include "harmap/geometry.hpp"

namespace harmap {

/// One entry of the scene's singular set: a preset or an explicit polyline.
struct CurveEntry {
  std::string preset;           // circle | square | filament_pair | torus_knot |
                                // hopf_link | polygon; empty = explicit vertices
  double radius = 0, side = 0, separation = 0, big_radius = 0, small_radius = 0,
         offset = 0;
  int knot_p = 2, knot_q = 3;
  int segments = 0;             // 0 = preset default
  std::optional<Vec3> center;   // default: cell center + half-spacing offset
  int orientation = 1;          // -1 reverses
  int multiplicity = 1;         // repeated scene entries
  double intensity = 1;         // wire systems
  std::vector<Vec3> vertices;   // explicit polygon
  std::string vertices_file;
};

/// Parsed scene configuration. Emission is canonical: emit(parse(emit(s)))
/// is byte-identical.
struct Scene {
  Domain domain = Domain::torus3(2 * 3.14159265358979323846, 2 * 3.14159265358979323846,
                                 2 * 3.14159265358979323846);
  std::array<int, 3> grid_n{64, 64, 64};
  double sigma_h = 2.0;
  unsigned seed = 1;
  std::vector<CurveEntry> entries;
  std::vector<PointCharge> charges;
  std::optional<std::array<double, 3>> sweep_delta;  // lo, hi, count
  std::optional<std::array<double, 3>> sweep_p;
  std::optional<std::array<double, 3>> sweep_s;

  std::string emit() const;            // canonical JSON text
  std::string hash() const;            // hex fnv-1a of the canonical emission
};

Scene scene_from_json_text(const std::string& text);
Scene scene_from_file(const std::string& path);

/// The bundled default: one circle of radius L/8 in a (2 pi)^3 torus.
Scene default_circle_scene();

/// Materialize entries into oriented curves (multiplicity = repeated copies),
/// resampled to at most `max_h` segment length when max_h > 0.
std::vector<Curve> build_curves(const Scene& scene, double max_h = 0);
std::vector<double> wire_intensities(const Scene& scene);

/// Raw little-endian binary + JSON header field export.
void export_field(const std::string& base_path, const Grid& grid,
                  const std::vector<const std::vector<double>*>& components,
                  const std::vector<std::string>& names);

}  // namespace harmap

#endif
