#include "lifi/scene_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace lifi {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

using Section = std::map<std::string, double>;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct ConfigFile {
  std::map<std::string, Section> sections;
  std::string activity;
};

ConfigFile parse(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene file " + path);
  ConfigFile cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty() && key == "activity") {
      cfg.activity = value;
      continue;
    }
    try {
      cfg.sections[section][key] = std::stod(value);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": not a number: " + value);
    }
  }
  return cfg;
}

double get(const Section& s, const std::string& key, double fallback) {
  const auto it = s.find(key);
  return it == s.end() ? fallback : it->second;
}

double require(const Section& s, const std::string& key, const std::string& where) {
  const auto it = s.find(key);
  if (it == s.end())
    throw std::runtime_error("scene file missing [" + where + "] " + key);
  return it->second;
}

}  // namespace

Scene load_scene(const std::string& path) {
  const ConfigFile cfg = parse(path);
  Scene scene;
  if (!cfg.activity.empty()) scene.activity = activity_from_string(cfg.activity);

  if (const auto it = cfg.sections.find("room"); it != cfg.sections.end()) {
    const Section& s = it->second;
    scene.room.length = get(s, "length_m", scene.room.length);
    scene.room.width = get(s, "width_m", scene.room.width);
    scene.room.height = get(s, "height_m", scene.room.height);
    scene.room.rho_wall = get(s, "rho_wall", scene.room.rho_wall);
    scene.room.rho_ceiling = get(s, "rho_ceiling", scene.room.rho_ceiling);
    scene.room.rho_floor = get(s, "rho_floor", scene.room.rho_floor);
  }
  if (const auto it = cfg.sections.find("ap"); it != cfg.sections.end()) {
    const Section& s = it->second;
    scene.ap.position = {get(s, "x_m", 0.0), get(s, "y_m", 0.0),
                         get(s, "z_m", scene.room.height)};
    scene.ap.lambertian_m = get(s, "lambertian_m", 1.0);
    Vec3 n{get(s, "normal_x", 0.0), get(s, "normal_y", 0.0), get(s, "normal_z", -1.0)};
    scene.ap.normal = n.normalized();
  }
  if (const auto it = cfg.sections.find("body"); it != cfg.sections.end()) {
    const Section& s = it->second;
    BodyPrism body;
    body.anchor = {require(s, "anchor_x_m", "body"), require(s, "anchor_y_m", "body")};
    body.length = get(s, "length_m", body.length);
    body.width = get(s, "width_m", body.width);
    body.height = get(s, "height_m", body.height);
    body.direction = get(s, "direction_deg", 0.0) * kDegToRad;
    body.rho_body = get(s, "rho_body", body.rho_body);
    body.rho_hair = get(s, "rho_hair", body.rho_hair);
    scene.body = body;
  }
  {
    const auto it = cfg.sections.find("ue");
    if (it == cfg.sections.end()) throw std::runtime_error("scene file missing [ue]");
    const Section& s = it->second;
    scene.ue.position = {require(s, "x_m", "ue"), require(s, "y_m", "ue"),
                         require(s, "z_m", "ue")};
    scene.ue.polar = get(s, "polar_deg", 0.0) * kDegToRad;
    scene.ue.azimuth = get(s, "azimuth_deg", 0.0) * kDegToRad;
    scene.ue.area = get(s, "area_m2", scene.ue.area);
    scene.ue.fov = get(s, "fov_deg", 90.0) * kDegToRad;
    scene.ue.responsivity = get(s, "responsivity_a_per_w", scene.ue.responsivity);
  }
  scene.validate();
  return scene;
}

void save_scene(const Scene& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  char buf[512];
  auto w = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof(buf), fmt, args...);
    out << buf;
  };
  out << "activity = " << to_string(scene.activity) << "\n\n[room]\n";
  w("length_m = %.12g\nwidth_m = %.12g\nheight_m = %.12g\n", scene.room.length,
    scene.room.width, scene.room.height);
  w("rho_wall = %.12g\nrho_ceiling = %.12g\nrho_floor = %.12g\n", scene.room.rho_wall,
    scene.room.rho_ceiling, scene.room.rho_floor);
  out << "\n[ap]\n";
  w("x_m = %.12g\ny_m = %.12g\nz_m = %.12g\nlambertian_m = %.12g\n",
    scene.ap.position.x(), scene.ap.position.y(), scene.ap.position.z(),
    scene.ap.lambertian_m);
  w("normal_x = %.12g\nnormal_y = %.12g\nnormal_z = %.12g\n", scene.ap.normal.x(),
    scene.ap.normal.y(), scene.ap.normal.z());
  if (scene.body) {
    const BodyPrism& b = *scene.body;
    out << "\n[body]\n";
    w("anchor_x_m = %.12g\nanchor_y_m = %.12g\n", b.anchor.x(), b.anchor.y());
    w("length_m = %.12g\nwidth_m = %.12g\nheight_m = %.12g\n", b.length, b.width,
      b.height);
    w("direction_deg = %.12g\nrho_body = %.12g\nrho_hair = %.12g\n",
      b.direction / kDegToRad, b.rho_body, b.rho_hair);
  }
  out << "\n[ue]\n";
  w("x_m = %.12g\ny_m = %.12g\nz_m = %.12g\n", scene.ue.position.x(),
    scene.ue.position.y(), scene.ue.position.z());
  w("polar_deg = %.12g\nazimuth_deg = %.12g\n", scene.ue.polar / kDegToRad,
    scene.ue.azimuth / kDegToRad);
  w("area_m2 = %.12g\nfov_deg = %.12g\nresponsivity_a_per_w = %.12g\n", scene.ue.area,
    scene.ue.fov / kDegToRad, scene.ue.responsivity);
}

}  // namespace lifi
