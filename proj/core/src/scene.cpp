#include "harmap/scene.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "harmap/util.hpp"

namespace harmap {

using json = nlohmann::json;

namespace {

json vec_to_json(const Vec3& v, int n) {
  json a = json::array();
  for (int j = 0; j < n; ++j) a.push_back(v[j]);
  return a;
}

Vec3 vec_from_json(const json& a) {
  Vec3 v{0, 0, 0};
  for (std::size_t j = 0; j < a.size() && j < 3; ++j) v[j] = a[j].get<double>();
  return v;
}

}  // namespace

std::string Scene::emit() const {
  json j;
  if (domain.kind == DomainKind::torus) {
    j["domain"] = {{"kind", "torus"}, {"lengths", vec_to_json(domain.lengths, domain.n)}};
  } else {
    j["domain"] = {{"kind", "euclidean"}};
  }
  j["grid"] = {grid_n[0], grid_n[1], grid_n[2]};
  j["sigma_h"] = sigma_h;
  j["seed"] = seed;
  json cs = json::array();
  for (const auto& e : entries) {
    json c;
    if (!e.preset.empty()) c["preset"] = e.preset;
    if (e.preset == "circle") c["radius"] = e.radius;
    if (e.preset == "square") c["side"] = e.side;
    if (e.preset == "filament_pair") c["separation"] = e.separation;
    if (e.preset == "torus_knot") {
      c["p"] = e.knot_p;
      c["q"] = e.knot_q;
      c["big_radius"] = e.big_radius;
      c["small_radius"] = e.small_radius;
    }
    if (e.preset == "hopf_link") {
      c["radius"] = e.radius;
      c["offset"] = e.offset;
    }
    if (e.segments > 0) c["segments"] = e.segments;
    if (e.center) c["center"] = vec_to_json(*e.center, domain.n);
    if (e.orientation != 1) c["orientation"] = e.orientation;
    if (e.multiplicity != 1) c["multiplicity"] = e.multiplicity;
    if (e.intensity != 1) c["intensity"] = e.intensity;
    if (!e.vertices_file.empty()) c["vertices_file"] = e.vertices_file;
    if (!e.vertices.empty()) {
      json vs = json::array();
      for (const auto& v : e.vertices) vs.push_back(vec_to_json(v, 3));
      c["vertices"] = vs;
    }
    cs.push_back(c);
  }
  if (!cs.empty()) j["curves"] = cs;
  if (!charges.empty()) {
    json qs = json::array();
    for (const auto& q : charges)
      qs.push_back({{"position", vec_to_json(q.position, 2)},
                    {"multiplicity", q.multiplicity}});
    j["charges"] = qs;
  }
  auto sweep = [&](const char* name, const std::optional<std::array<double, 3>>& s) {
    if (s) j["sweeps"][name] = {(*s)[0], (*s)[1], (*s)[2]};
  };
  sweep("delta", sweep_delta);
  sweep("p", sweep_p);
  sweep("s", sweep_s);
  return j.dump(2) + "\n";
}

std::string Scene::hash() const {
  std::uint64_t h = fnv1a(emit());
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

Scene scene_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scene parse error: ") + e.what());
  }
  Scene s;
  try {
    if (j.contains("domain")) {
      const json& d = j["domain"];
      std::string kind = d.value("kind", "torus");
      if (kind == "torus") {
        Vec3 l = d.contains("lengths") ? vec_from_json(d["lengths"])
                                       : Vec3{2 * std::numbers::pi, 2 * std::numbers::pi,
                                              2 * std::numbers::pi};
        int n = d.contains("lengths") ? static_cast<int>(d["lengths"].size()) : 3;
        s.domain = n == 2 ? Domain::torus2(l.x, l.y) : Domain::torus3(l.x, l.y, l.z);
      } else if (kind == "euclidean") {
        s.domain = Domain::euclidean3();
      } else {
        throw std::invalid_argument("scene parse error: unknown domain kind '" + kind + "'");
      }
    }
    if (j.contains("grid")) {
      if (j["grid"].is_number()) {
        int n = j["grid"].get<int>();
        s.grid_n = {n, n, n};
      } else {
        for (int k = 0; k < 3; ++k)
          s.grid_n[k] = k < static_cast<int>(j["grid"].size()) ? j["grid"][k].get<int>() : 1;
      }
    }
    if (s.domain.n == 2) s.grid_n[2] = 1;
    s.sigma_h = j.value("sigma_h", 2.0);
    s.seed = j.value("seed", 1u);
    for (const auto& c : j.value("curves", json::array())) {
      CurveEntry e;
      e.preset = c.value("preset", "");
      e.radius = c.value("radius", 0.0);
      e.side = c.value("side", 0.0);
      e.separation = c.value("separation", 0.0);
      e.big_radius = c.value("big_radius", 0.0);
      e.small_radius = c.value("small_radius", 0.0);
      e.offset = c.value("offset", 0.0);
      e.knot_p = c.value("p", 2);
      e.knot_q = c.value("q", 3);
      e.segments = c.value("segments", 0);
      if (c.contains("center")) e.center = vec_from_json(c["center"]);
      e.orientation = c.value("orientation", 1);
      e.multiplicity = c.value("multiplicity", 1);
      e.intensity = c.value("intensity", 1.0);
      e.vertices_file = c.value("vertices_file", "");
      for (const auto& v : c.value("vertices", json::array()))
        e.vertices.push_back(vec_from_json(v));
      if (e.preset.empty() && e.vertices.empty() && e.vertices_file.empty())
        throw std::invalid_argument(
            "scene parse error: curve entry needs a preset, vertices, or vertices_file");
      s.entries.push_back(e);
    }
    for (const auto& q : j.value("charges", json::array())) {
      PointCharge pc;
      pc.position = vec_from_json(q.at("position"));
      pc.multiplicity = q.value("multiplicity", 1);
      s.charges.push_back(pc);
    }
    if (j.contains("sweeps")) {
      auto rd = [&](const char* name) -> std::optional<std::array<double, 3>> {
        if (!j["sweeps"].contains(name)) return std::nullopt;
        const json& a = j["sweeps"][name];
        return std::array<double, 3>{a[0].get<double>(), a[1].get<double>(),
                                     a[2].get<double>()};
      };
      s.sweep_delta = rd("delta");
      s.sweep_p = rd("p");
      s.sweep_s = rd("s");
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("scene parse error: ") + e.what());
  }
  return s;
}

Scene scene_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scene parse error: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scene_from_json_text(buf.str());
}

Scene default_circle_scene() {
  Scene s;
  double l = 2 * std::numbers::pi;
  s.domain = Domain::torus3(l, l, l);
  s.grid_n = {64, 64, 64};
  CurveEntry e;
  e.preset = "circle";
  e.radius = l / 8;
  s.entries.push_back(e);
  return s;
}

std::vector<Curve> build_curves(const Scene& scene, double max_h) {
  const Domain& d = scene.domain;
  if (d.n == 2 && !scene.entries.empty())
    throw std::invalid_argument("curves need a 3d domain; 2-tori carry point charges");
  double h_half = 0;
  Vec3 default_center{0, 0, 0};
  if (d.periodic()) {
    for (int j = 0; j < d.n; ++j)
      default_center[j] = d.lengths[j] / 2 + d.lengths[j] / (2 * scene.grid_n[j]);
  }

  std::vector<Curve> out;
  for (const auto& e : scene.entries) {
    Vec3 center = e.center.value_or(default_center);
    std::vector<Curve> made;
    if (e.preset == "circle") {
      made.push_back(presets::circle(d, e.radius, center, e.segments > 0 ? e.segments : 256));
    } else if (e.preset == "square") {
      made.push_back(presets::square(d, e.side, center));
    } else if (e.preset == "filament_pair") {
      auto pair = presets::filament_pair(d, e.separation, center,
                                         e.segments > 0 ? e.segments : 64);
      made.insert(made.end(), pair.begin(), pair.end());
    } else if (e.preset == "torus_knot") {
      made.push_back(presets::torus_knot(d, e.knot_p, e.knot_q, e.big_radius,
                                         e.small_radius, center,
                                         e.segments > 0 ? e.segments : 512));
    } else if (e.preset == "hopf_link") {
      auto pair = presets::hopf_link(d, e.radius, e.offset, center,
                                     e.segments > 0 ? e.segments : 256);
      made.insert(made.end(), pair.begin(), pair.end());
    } else if (!e.preset.empty() && e.preset != "polygon") {
      throw std::invalid_argument("scene parse error: unknown preset '" + e.preset + "'");
    } else if (!e.vertices.empty()) {
      made.push_back(presets::polygon(d, e.vertices));
    } else {
      Scene sub;  // vertices from file: a bare JSON array of points
      std::ifstream in(e.vertices_file);
      if (!in)
        throw std::invalid_argument("scene parse error: cannot open " + e.vertices_file);
      json arr = json::parse(in, nullptr, true);
      std::vector<Vec3> vs;
      for (const auto& v : arr) vs.push_back(vec_from_json(v));
      made.push_back(presets::polygon(d, vs));
    }
    (void)h_half;
    for (auto& c : made) {
      Curve cur = e.orientation < 0 ? c.reversed() : c;
      if (max_h > 0 && cur.max_segment_length() > max_h)
        cur = resample_arclength(cur, max_h);
      for (int m = 0; m < e.multiplicity; ++m) out.push_back(cur);
    }
  }
  return out;
}

std::vector<double> wire_intensities(const Scene& scene) {
  std::vector<double> out;
  for (const auto& e : scene.entries) {
    int copies = 1;
    if (e.preset == "filament_pair" || e.preset == "hopf_link") copies = 2;
    for (int c = 0; c < copies * e.multiplicity; ++c) out.push_back(e.intensity);
  }
  return out;
}

void export_field(const std::string& base_path, const Grid& grid,
                  const std::vector<const std::vector<double>*>& components,
                  const std::vector<std::string>& names) {
  std::ofstream bin(base_path + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + base_path + ".bin");
  for (const auto* comp : components)
    bin.write(reinterpret_cast<const char*>(comp->data()),
              static_cast<std::streamsize>(comp->size() * sizeof(double)));
  json hdr;
  hdr["shape"] = {grid.n[0], grid.n[1], grid.n[2]};
  hdr["periods"] = vec_to_json(grid.dom.lengths, grid.dom.n);
  hdr["components"] = names;
  hdr["dtype"] = "float64le";
  hdr["order"] = "x-fastest";
  std::ofstream h(base_path + ".json");
  h << hdr.dump(2) << "\n";
}

}  // namespace harmap
