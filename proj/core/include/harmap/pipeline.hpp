#ifndef HARMAP_PIPELINE_HPP
#define HARMAP_PIPELINE_HPP

#include "harmap/potential.hpp"
#include "harmap/scene.hpp"
#include "harmap/sectors.hpp"

namespace harmap {

/// A scene materialized on its grid: curves, current, Ewald potential and the
/// nodal distance field. The shared front half of every CLI pipeline.
struct SolvedScene {
  Scene scene;
  Grid grid;
  std::vector<Curve> curves;
  std::vector<PointCharge> charges;
  PotentialField pot;
  std::vector<double> dist;
};

struct PipelineOptions {
  int grid_override = 0;      // 0: scene value
  double sigma_h_override = 0;
  int threads = 1;
  double resample_factor = 1.0;  // curves resampled to resample_factor * h
};

SolvedScene solve_scene(const Scene& scene, const PipelineOptions& opts = {});

}  // namespace harmap

#endif
