// Copyright 2026 The cutfeec Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CUTFEEC_CONFIG_HPP
#define CUTFEEC_CONFIG_HPP

#include "cutfeec/geometry.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cutfeec {

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Entries of a sectioned key = value file as ("section.key", value), in file order.
/// '#' and ';' start comments; every key must sit inside a [section].
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

ConfigEntries parse_config(std::istream &in, const std::string &source = "<config>");

enum class Shape
{
  Disk,
  Annulus
};

enum class FacetChoice
{
  Full,
  Macro,
  Both  // norm-equiv only
};

enum class Problem
{
  Zero,      // f = 0, any k
  Constant,  // k = 0, f = 1: λ = 1, η = 0
  Poisson,   // k = 2 disk, f = 4: η = (R² - |x - c|²) dx∧dy
  Harmonic   // k = 1 annulus, f = dθ about the centre: λ = f, η = σ = 0
};

struct ExperimentConfig
{
  // [geometry]
  Shape shape = Shape::Disk;
  Vec2 center = Vec2::Zero();
  double radius = 0.75;
  double r_inner = 0.5;
  double r_outer = 0.95;
  Box box{-1.0, 1.0, -1.0, 1.0};
  Vec2 offset_direction = Vec2(1.0, 0.0);
  int max_path = kDefaultMaxPath;
  // [discretisation]
  int k = 2;
  std::vector<int> k_list;  // norm-equiv; empty means {k}
  std::vector<int> m_list{8, 16, 32};
  int quad_degree_volume = 2;
  int quad_degree_facet = 2;
  // [stabilisation]
  bool stabilize = true;
  double eta = 1.0;
  FacetChoice facet_set = FacetChoice::Macro;
  double delta = 0.25;
  // [experiment]
  Problem problem = Problem::Zero;
  std::vector<double> epsilon_list{0.0};
  // [output]
  std::string output;      // empty: standard output
  std::string field_dump;  // solve: sampled fields on a grid_n x grid_n grid
  std::string dof_dump;    // solve: DOF values per block
  std::string mesh_dump;   // solve: active mesh and stabilisation facets
  int grid_n = 41;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;
  /// Every key with its resolved value, as "section.key = value".
  std::vector<std::string> resolved() const;
  std::vector<int> degrees() const { return k_list.empty() ? std::vector<int>{k} : k_list; }
};

/// Applies entries over the defaults; unknown keys and malformed values are errors.
ExperimentConfig make_config(const ConfigEntries &entries);
ExperimentConfig config_from_string(const std::string &text);
ExperimentConfig load_config(const std::string &path);

const char *to_string(Shape shape);
const char *to_string(FacetChoice choice);
const char *to_string(Problem problem);

}  // namespace cutfeec

#endif  // CUTFEEC_CONFIG_HPP
