#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lcsrl::xcsf {

enum class GeneralityMode {
  Product,  // fraction of the discrete input space covered
  MeanWidth  // mean over dimensions of the covered fraction
};

struct Hyperparams {
  std::size_t population_size = 5000;  // N, in microclassifiers
  double beta = 0.1;
  double beta_mu = 0.05;  // learning rate of the noise estimate mu
  double alpha = 0.1;
  double eps0 = 0.01;
  double nu = 5.0;
  double gamma = 0.95;
  double theta_ga = 50.0;
  double tau = 0.5;
  double chi = 1.0;
  double upsilon = 0.5;
  double mutation_rate = 0.05;
  double theta_del = 50.0;
  double delta = 0.1;
  double theta_sub = 50.0;
  double eps_init = 1e-3;
  double fitness_init = 1e-3;
  std::size_t theta_mna = 4;
  bool ga_subsumption = true;
  bool action_set_subsumption = false;
  int r0 = 4;
  int m0 = 4;
  double x0 = 10.0;
  double eta = 0.1;

  double explore_rate = 0.5;
  std::size_t episode_step_cap = 200;
  bool track_noise = true;  // use max(eps - mu, 0) for accuracy
  GeneralityMode generality = GeneralityMode::Product;

  /// Throws std::invalid_argument naming the first offending parameter.
  void validate() const {
    auto fail = [](const std::string& name, const std::string& why) {
      throw std::invalid_argument("invalid hyperparameter " + name + ": " + why);
    };
    auto unit = [&](const char* name, double v) {
      if (!(v >= 0.0 && v <= 1.0)) fail(name, "must lie in [0,1]");
    };
    if (population_size == 0) fail("N", "must be positive");
    if (!(beta > 0.0 && beta <= 1.0)) fail("beta", "must lie in (0,1]");
    if (!(beta_mu > 0.0 && beta_mu <= 1.0)) fail("beta_eps", "must lie in (0,1]");
    if (!(alpha > 0.0)) fail("alpha", "must be positive");
    if (!(eps0 > 0.0)) fail("eps0", "must be positive");
    if (!(nu > 0.0)) fail("nu", "must be positive");
    unit("gamma", gamma);
    if (theta_ga < 0.0) fail("theta_ga", "must be nonnegative");
    if (!(tau > 0.0 && tau <= 1.0)) fail("tau", "must lie in (0,1]");
    unit("chi", chi);
    unit("upsilon", upsilon);
    unit("mu", mutation_rate);
    if (theta_del < 0.0) fail("theta_del", "must be nonnegative");
    unit("delta", delta);
    if (theta_sub < 0.0) fail("theta_sub", "must be nonnegative");
    if (!(eps_init >= 0.0)) fail("eps_I", "must be nonnegative");
    if (!(fitness_init > 0.0)) fail("f_I", "must be positive");
    if (theta_mna == 0 || theta_mna > 4) fail("theta_mna", "must lie in [1, number of actions]");
    if (r0 < 0) fail("r0", "must be nonnegative");
    if (m0 < 1) fail("m0", "must be at least 1");
    if (!(x0 != 0.0)) fail("x0", "must be nonzero");
    if (!(eta > 0.0 && eta <= 1.0)) fail("eta", "must lie in (0,1]");
    unit("explore", explore_rate);
    if (episode_step_cap == 0) fail("episode_step_cap", "must be positive");
  }
};

}  // namespace lcsrl::xcsf
