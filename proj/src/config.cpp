// Copyright 2026 The cutfeec Authors
// SPDX-License-Identifier: Apache-2.0

#include "cutfeec/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace cutfeec {

namespace {

std::string trim(const std::string &s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &value)
{
  std::string v = value;
  for (char &c : v)
    if (c == ',')
      c = ' ';
  std::istringstream is(v);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;)
    out.push_back(tok);
  return out;
}

double to_double(const std::string &key, const std::string &tok)
{
  errno = 0;
  char *end = nullptr;
  const double x = std::strtod(tok.c_str(), &end);
  if (tok.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x))
    throw ConfigError("config: " + key + ": '" + tok + "' is not a finite number");
  return x;
}

int to_int(const std::string &key, const std::string &tok)
{
  errno = 0;
  char *end = nullptr;
  const long x = std::strtol(tok.c_str(), &end, 10);
  if (tok.empty() || *end != '\0' || errno == ERANGE || x < -1000000 || x > 1000000)
    throw ConfigError("config: " + key + ": '" + tok + "' is not an integer");
  return static_cast<int>(x);
}

std::vector<double> doubles(const std::string &key, const std::string &value, std::size_t count = 0)
{
  std::vector<double> out;
  for (const auto &tok : split_list(value))
    out.push_back(to_double(key, tok));
  if (count && out.size() != count)
    throw ConfigError("config: " + key + " expects " + std::to_string(count) + " numbers");
  return out;
}

std::vector<int> ints(const std::string &key, const std::string &value)
{
  std::vector<int> out;
  for (const auto &tok : split_list(value))
    out.push_back(to_int(key, tok));
  return out;
}

std::string fmt(double x)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <typename T>
std::string join(const std::vector<T> &v)
{
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i)
  {
    if (i)
      out += ' ';
    if constexpr (std::is_floating_point_v<T>)
      out += fmt(v[i]);
    else
      out += std::to_string(v[i]);
  }
  return out;
}

struct Key
{
  const char *name;
  std::function<void(ExperimentConfig &, const std::string &key, const std::string &value)> set;
  std::function<std::string(const ExperimentConfig &)> get;
};

const std::vector<Key> &keys()
{
  using C = ExperimentConfig;
  using S = std::string;
  static const std::vector<Key> table = {
      {"geometry.shape",
       [](C &c, const S &k, const S &v) {
         if (v == "disk")
           c.shape = Shape::Disk;
         else if (v == "annulus")
           c.shape = Shape::Annulus;
         else
           throw ConfigError("config: " + k + " must be disk or annulus");
       },
       [](const C &c) { return S(to_string(c.shape)); }},
      {"geometry.center",
       [](C &c, const S &k, const S &v) {
         const auto x = doubles(k, v, 2);
         c.center = Vec2(x[0], x[1]);
       },
       [](const C &c) { return fmt(c.center.x()) + " " + fmt(c.center.y()); }},
      {"geometry.radius", [](C &c, const S &k, const S &v) { c.radius = to_double(k, v); },
       [](const C &c) { return fmt(c.radius); }},
      {"geometry.r_inner", [](C &c, const S &k, const S &v) { c.r_inner = to_double(k, v); },
       [](const C &c) { return fmt(c.r_inner); }},
      {"geometry.r_outer", [](C &c, const S &k, const S &v) { c.r_outer = to_double(k, v); },
       [](const C &c) { return fmt(c.r_outer); }},
      {"geometry.box",
       [](C &c, const S &k, const S &v) {
         const auto x = doubles(k, v, 4);
         c.box = Box{x[0], x[1], x[2], x[3]};
       },
       [](const C &c) {
         return fmt(c.box.xmin) + " " + fmt(c.box.xmax) + " " + fmt(c.box.ymin) + " " + fmt(c.box.ymax);
       }},
      {"geometry.offset_direction",
       [](C &c, const S &k, const S &v) {
         const auto x = doubles(k, v, 2);
         c.offset_direction = Vec2(x[0], x[1]);
       },
       [](const C &c) { return fmt(c.offset_direction.x()) + " " + fmt(c.offset_direction.y()); }},
      {"geometry.max_path", [](C &c, const S &k, const S &v) { c.max_path = to_int(k, v); },
       [](const C &c) { return std::to_string(c.max_path); }},
      {"discretisation.k", [](C &c, const S &k, const S &v) { c.k = to_int(k, v); },
       [](const C &c) { return std::to_string(c.k); }},
      {"discretisation.k_list", [](C &c, const S &k, const S &v) { c.k_list = ints(k, v); },
       [](const C &c) { return join(c.k_list); }},
      {"discretisation.m_list", [](C &c, const S &k, const S &v) { c.m_list = ints(k, v); },
       [](const C &c) { return join(c.m_list); }},
      {"discretisation.quad_degree_volume",
       [](C &c, const S &k, const S &v) { c.quad_degree_volume = to_int(k, v); },
       [](const C &c) { return std::to_string(c.quad_degree_volume); }},
      {"discretisation.quad_degree_facet",
       [](C &c, const S &k, const S &v) { c.quad_degree_facet = to_int(k, v); },
       [](const C &c) { return std::to_string(c.quad_degree_facet); }},
      {"stabilisation.stabilize",
       [](C &c, const S &k, const S &v) {
         if (v == "on" || v == "true")
           c.stabilize = true;
         else if (v == "off" || v == "false")
           c.stabilize = false;
         else
           throw ConfigError("config: " + k + " must be on or off");
       },
       [](const C &c) { return S(c.stabilize ? "on" : "off"); }},
      {"stabilisation.eta", [](C &c, const S &k, const S &v) { c.eta = to_double(k, v); },
       [](const C &c) { return fmt(c.eta); }},
      {"stabilisation.facet_set",
       [](C &c, const S &k, const S &v) {
         if (v == "full")
           c.facet_set = FacetChoice::Full;
         else if (v == "macro")
           c.facet_set = FacetChoice::Macro;
         else if (v == "both")
           c.facet_set = FacetChoice::Both;
         else
           throw ConfigError("config: " + k + " must be full, macro or both");
       },
       [](const C &c) { return S(to_string(c.facet_set)); }},
      {"stabilisation.delta", [](C &c, const S &k, const S &v) { c.delta = to_double(k, v); },
       [](const C &c) { return fmt(c.delta); }},
      {"experiment.problem",
       [](C &c, const S &k, const S &v) {
         if (v == "zero")
           c.problem = Problem::Zero;
         else if (v == "constant")
           c.problem = Problem::Constant;
         else if (v == "poisson")
           c.problem = Problem::Poisson;
         else if (v == "harmonic")
           c.problem = Problem::Harmonic;
         else
           throw ConfigError("config: " + k + " must be zero, constant, poisson or harmonic");
       },
       [](const C &c) { return S(to_string(c.problem)); }},
      {"experiment.epsilon_list", [](C &c, const S &k, const S &v) { c.epsilon_list = doubles(k, v); },
       [](const C &c) { return join(c.epsilon_list); }},
      {"output.output", [](C &c, const S &, const S &v) { c.output = v; }, [](const C &c) { return c.output; }},
      {"output.field_dump", [](C &c, const S &, const S &v) { c.field_dump = v; },
       [](const C &c) { return c.field_dump; }},
      {"output.dof_dump", [](C &c, const S &, const S &v) { c.dof_dump = v; },
       [](const C &c) { return c.dof_dump; }},
      {"output.mesh_dump", [](C &c, const S &, const S &v) { c.mesh_dump = v; },
       [](const C &c) { return c.mesh_dump; }},
      {"output.grid_n", [](C &c, const S &k, const S &v) { c.grid_n = to_int(k, v); },
       [](const C &c) { return std::to_string(c.grid_n); }},
  };
  return table;
}

}  // namespace

const char *to_string(Shape shape) { return shape == Shape::Disk ? "disk" : "annulus"; }

const char *to_string(FacetChoice choice)
{
  switch (choice)
  {
  case FacetChoice::Full:
    return "full";
  case FacetChoice::Macro:
    return "macro";
  default:
    return "both";
  }
}

const char *to_string(Problem problem)
{
  switch (problem)
  {
  case Problem::Zero:
    return "zero";
  case Problem::Constant:
    return "constant";
  case Problem::Poisson:
    return "poisson";
  default:
    return "harmonic";
  }
}

ConfigEntries parse_config(std::istream &in, const std::string &source)
{
  ConfigEntries entries;
  std::set<std::string> seen;
  std::string section;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno)
  {
    const auto where = source + ":" + std::to_string(lineno);
    const auto hash = line.find_first_of("#;");
    line = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (line.empty())
      continue;
    if (line.front() == '[')
    {
      if (line.back() != ']')
        throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected key = value");
    if (section.empty())
      throw ConfigError(where + ": key outside of any section");
    const std::string key = section + "." + trim(line.substr(0, eq));
    if (!seen.insert(key).second)
      throw ConfigError(where + ": duplicate key " + key);
    entries.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return entries;
}

ExperimentConfig make_config(const ConfigEntries &entries)
{
  ExperimentConfig cfg;
  for (const auto &[key, value] : entries)
  {
    const Key *match = nullptr;
    for (const auto &k : keys())
      if (key == k.name)
        match = &k;
    if (!match)
      throw ConfigError("config: unknown key " + key);
    match->set(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig config_from_string(const std::string &text)
{
  std::istringstream is(text);
  return make_config(parse_config(is, "<string>"));
}

ExperimentConfig load_config(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("config: cannot open " + path);
  return make_config(parse_config(in, path));
}

void ExperimentConfig::validate() const
{
  auto require = [](bool ok, const std::string &msg) {
    if (!ok)
      throw ConfigError("config: " + msg);
  };
  require(box.xmax > box.xmin && box.ymax > box.ymin, "box must have positive extent");
  require(std::abs(box.width() - box.height()) <= 1e-12 * box.width(), "box must be square");
  require(offset_direction.allFinite(), "offset_direction must be finite");
  if (shape == Shape::Disk)
    require(radius > 0, "radius must be positive");
  else
  {
    require(r_inner > 0 && r_outer > 0, "radii must be positive");
    require(r_inner < r_outer, "annulus needs r_inner < r_outer");
  }
  require(max_path >= 1, "max_path must be at least 1");
  require(k >= 0 && k <= 2, "k must be 0, 1 or 2");
  for (int kk : k_list)
    require(kk >= 0 && kk <= 2, "k_list entries must be 0, 1 or 2");
  require(!m_list.empty(), "m_list must not be empty");
  for (int m : m_list)
    require(m >= 4, "mesh resolutions must satisfy m >= 4");
  require(quad_degree_volume >= 1 && quad_degree_volume <= 4, "quad_degree_volume must be in 1..4");
  require(quad_degree_facet >= 0 && quad_degree_facet <= 5, "quad_degree_facet must be in 0..5");
  require(eta > 0, "eta must be positive");
  require(delta > 0 && delta <= 1, "delta must lie in (0, 1]");
  require(!epsilon_list.empty(), "epsilon_list must not be empty");
  require(grid_n >= 2 && grid_n <= 4096, "grid_n must be in 2..4096");
  switch (problem)
  {
  case Problem::Constant:
    require(k == 0, "problem constant needs k = 0");
    break;
  case Problem::Poisson:
    require(k == 2 && shape == Shape::Disk, "problem poisson needs k = 2 on a disk");
    break;
  case Problem::Harmonic:
    require(k == 1 && shape == Shape::Annulus, "problem harmonic needs k = 1 on an annulus");
    break;
  default:
    break;
  }
}

std::vector<std::string> ExperimentConfig::resolved() const
{
  std::vector<std::string> out;
  for (const auto &k : keys())
    out.push_back(std::string(k.name) + " = " + k.get(*this));
  return out;
}

}  // namespace cutfeec
