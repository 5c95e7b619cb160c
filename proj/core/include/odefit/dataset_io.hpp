#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "odefit/cucker_smale.hpp"
#include "odefit/ode_solver.hpp"

namespace odefit {

/// One training trajectory plus the initial conditions of the test set.
struct Dataset {
  Index num_particles = 0;
  TimeGrid grid;
  CSParams truth;
  CSParams init;  ///< starting guess handed to the optimizers
  std::uint64_t seed = 0;
  double noise_std = 0.0;
  Vector x0;
  StateMatrix targets;  ///< (N_t + 1) x 4N observed states
  std::vector<Vector> test_x0s;

  bool operator==(const Dataset& other) const;
};

/// Text format: a single-line JSON header, then a CSV block with a header row
/// `t,s0,s1,...` and one row per sample time. Numbers use the shortest
/// round-trip decimal form, so a write/read cycle is lossless.
void write_dataset(std::ostream& out, const Dataset& data);
Dataset read_dataset(std::istream& in);

void save_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace odefit
