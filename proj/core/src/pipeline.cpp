#include "harmap/pipeline.hpp"

namespace harmap {

SolvedScene solve_scene(const Scene& scene_in, const PipelineOptions& opts) {
  Scene scene = scene_in;
  if (opts.grid_override > 0)
    scene.grid_n = {opts.grid_override, opts.grid_override,
                    scene.domain.n == 2 ? 1 : opts.grid_override};
  if (opts.sigma_h_override > 0) scene.sigma_h = opts.sigma_h_override;
  if (!scene.domain.periodic())
    throw std::invalid_argument("solve_scene needs a torus domain (use the inductance "
                                "pipeline for euclidean wire systems)");

  Grid grid(scene.domain, scene.grid_n);
  double h = grid.max_spacing();
  std::vector<Curve> curves = build_curves(scene, opts.resample_factor * h);

  CurrentSpectrum cs = scene.domain.n == 2 ? current_spectrum(scene.charges, grid)
                                           : current_spectrum(curves, grid, opts.threads);
  PotentialField pot = solve_potential(cs, scene.sigma_h * h, opts.threads);
  std::vector<double> dist = scene.domain.n == 2 ? distance_field(grid, scene.charges)
                                                 : distance_field(grid, curves);
  return SolvedScene{std::move(scene), grid,         std::move(curves),
                     scene_in.charges, std::move(pot), std::move(dist)};
}

}  // namespace harmap
