#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fsbc/diagnostics.hpp"
#include "fsbc/dynamics.hpp"
#include "fsbc/grid.hpp"
#include "fsbc/initial_data.hpp"

namespace fsbc {

/// A rejected configuration; key() names the offending entry (dotted path).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct SurfaceFamily {
  std::string family = "flat";  ///< flat | wave
  double eps = 1e-3;
  int k1 = 1;
  int k2 = 0;
};

struct VelocityFamily {
  std::string family = "zero";  ///< zero | random_solenoidal | columnar_vortex
  RandomFieldOptions random;
  double gamma = 0.5;   ///< vortex strength
  double radius = 0.8;  ///< vortex core size
};

struct Config {
  struct {
    int nx = 16, ny = 16, nz = 17;
    double b = 10.0;
  } grid;
  struct {
    double sigma = 1.0;
    bool fixed_lid = false;
  } physics;
  struct {
    std::optional<double> delta0, delta1;  ///< defaults follow the depth
  } cutoff;
  struct {
    SurfaceFamily psi0;
    VelocityFamily v0;
    std::string snapshot;  ///< when set, psi0 and v0 are read from it
    bool project = true;   ///< project v0 onto solenoidal fields first
  } initial_data;
  struct {
    double safety = 0.5;
    double dt = 0.0;  ///< fixed step; 0 selects the CFL step
    double t_end = 1.0;
    int max_steps = 1000;
    int projection_cadence = 1;  ///< project every n steps; 0 never
  } stepping;
  struct {
    double elliptic_tol = 1e-10;
    int max_iters = 500;
    int restart = 50;
    double eps_geo = 1e-3;
  } tolerances;
  struct {
    int record_every = 1;
    bool k2_accumulator_enabled = true;
    BreakdownThresholds thresholds;
  } diagnostics;
  struct {
    std::string directory = "out";
    int snapshot_every = 0;  ///< 0 writes only the final snapshot
  } output;
  struct {
    bool flat_only = false;
  } check;
  struct {
    std::vector<int> modes = {1, 2, 3};
    double eps = 1e-4;
  } dispersion;
};

/// Parses a JSON document, applies `overrides` ("grid.nx=32", values parsed
/// as JSON, falling back to strings) and validates.  Unknown keys are errors.
Config parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {});
Config parse_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Checks every invariant; also builds the cut-off for the initial surface.
void validate(const Config& c);

Grid make_grid(const Config& c);
CutoffProfile make_cutoff(const Config& c, const Grid& g, double psi_sup);
DynamicsConfig make_dynamics(const Config& c, const Grid& g, double psi_sup);

/// Initial state from the named families or the snapshot (unprojected).
State initial_state(const Config& c, const Grid& g);

}  // namespace fsbc
