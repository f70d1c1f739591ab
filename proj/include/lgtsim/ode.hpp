#pragma once

#include "lgtsim/numkit.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgtsim {

// dy/dt written into the third argument; it is pre-sized to y.size().
using OdeRhs = std::function<void(double t, const CVector& y, CVector& dydt)>;

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 selects a step automatically
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 50'000'000;
};

inline OdeOptions unitary_ode_options() { return {1e-9, 1e-12}; }
inline OdeOptions dissipative_ode_options() { return {1e-7, 1e-10}; }

struct Trajectory {
  std::vector<double> times;
  std::vector<CVector> states;
  CVector final_state;  // state at the last accepted step
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;
};

class OdeError : public std::runtime_error {
 public:
  OdeError(const std::string& what, double t) : std::runtime_error(what), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

// Dormand-Prince 5(4) with FSAL and 4th-order dense output.
// sample_times must be sorted and lie inside [t0, t1]; if empty, only t1 is sampled.
Trajectory integrate_ode(const OdeRhs& f, const CVector& y0, double t0, double t1,
                         const std::vector<double>& sample_times, const OdeOptions& opts = {});

std::vector<double> linspace(double a, double b, std::size_t n);

}  // namespace lgtsim
