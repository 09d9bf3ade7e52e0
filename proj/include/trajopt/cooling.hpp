#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trajopt/conserved.hpp"
#include "trajopt/core.hpp"
#include "trajopt/error.hpp"
#include "trajopt/trajectory.hpp"

namespace trajopt {

inline constexpr std::size_t kDefaultMaxCoolingDim = 4096;

/// Local Hamiltonian spectrum plus an optional non-thermal diagonal state.
struct SystemSpec {
  Vector energies;
  std::optional<Vector> populations;
};

enum class CoolingKind { Coherent, Incoherent };

/// A cooling problem assembled from system (S), machine (M) and, for the
/// incoherent case, bath (B) factors. Basis label of |s m b> is
/// (s * dim_M + m) * dim_B + b; dim_B is 1 without a bath.
struct CoolingInstance {
  CoolingKind kind = CoolingKind::Coherent;
  ProblemInstance instance;
  Vector system_energies;
  Vector machine_energies;
  Vector bath_energies;
  double beta = 1.0;
  std::optional<double> beta_bath;
  std::vector<std::size_t> ground_indices;

  std::size_t system_dim() const { return system_energies.size(); }
  std::size_t machine_dim() const { return machine_energies.size(); }
  std::size_t bath_dim() const { return bath_energies.empty() ? 1 : bath_energies.size(); }
  std::size_t label(std::size_t s, std::size_t m, std::size_t b = 0) const {
    return (s * machine_dim() + m) * bath_dim() + b;
  }
};

/// Gibbs weights exp(-beta E) / Z. beta = 0 is uniform; beta = +inf puts the
/// weight uniformly on the lowest level(s).
inline Vector thermal_populations(std::span<const double> energies, double beta) {
  if (energies.empty()) throw Error(ErrorCode::DimensionMismatch, "thermal_populations: no levels");
  detail::require_finite(energies, "energies");
  if (std::isnan(beta)) throw Error(ErrorCode::NonFinite, "thermal_populations: beta is NaN");
  const double e0 = *std::min_element(energies.begin(), energies.end());
  Vector w(energies.size());
  if (std::isinf(beta) && beta > 0) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = energies[i] - e0 <= kCoefficientEps ? 1.0 : 0.0;
  } else {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(-beta * (energies[i] - e0));
  }
  const double z = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= z;
  return w;
}

namespace detail {

inline Vector populations_or_thermal(const SystemSpec& spec, double beta, const char* name) {
  if (!spec.populations) return thermal_populations(spec.energies, beta);
  const Vector& p = *spec.populations;
  require_length(p.size(), spec.energies.size(), name);
  require_finite(p, name);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::abs(total - 1.0) > kNormalizationTol) {
    throw Error(ErrorCode::NotNormalized, std::string(name) + " populations do not sum to 1");
  }
  for (double x : p) {
    if (x < 0.0) throw Error(ErrorCode::NegativeEigenvalue, std::string(name) + " population is negative");
  }
  return p;
}

inline std::vector<std::size_t> ground_levels(std::span<const double> energies) {
  const double e0 = *std::min_element(energies.begin(), energies.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (energies[i] - e0 <= kCoefficientEps) out.push_back(i);
  }
  return out;
}

inline void check_dim(std::size_t d, std::size_t max_dim) {
  if (d > max_dim) {
    throw Error(ErrorCode::DimensionOverflow,
                "joint dimension " + std::to_string(d) + " exceeds cap " + std::to_string(max_dim));
  }
}

}  // namespace detail

/// System and machine under an arbitrary joint unitary. Target is the system
/// ground-subspace population, cost the total energy E_s + E_m; the machine
/// starts thermal at beta and the system at its given (or thermal) state.
inline CoolingInstance coherent_instance(const SystemSpec& sys, const SystemSpec& machine,
                                         double beta,
                                         std::size_t max_dim = kDefaultMaxCoolingDim) {
  if (sys.energies.empty() || machine.energies.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "coherent_instance: empty factor");
  }
  const std::size_t ds = sys.energies.size();
  const std::size_t dm = machine.energies.size();
  detail::check_dim(ds * dm, max_dim);
  const Vector ps = detail::populations_or_thermal(sys, beta, "system");
  const Vector pm = thermal_populations(machine.energies, beta);
  const auto ground = detail::ground_levels(sys.energies);

  CoolingInstance ci;
  ci.kind = CoolingKind::Coherent;
  ci.system_energies = sys.energies;
  ci.machine_energies = machine.energies;
  ci.beta = beta;
  auto& inst = ci.instance;
  for (std::size_t s = 0; s < ds; ++s) {
    const bool is_ground = std::find(ground.begin(), ground.end(), s) != ground.end();
    for (std::size_t m = 0; m < dm; ++m) {
      inst.lambda.push_back(ps[s] * pm[m]);
      inst.target.push_back(is_ground ? 1.0 : 0.0);
      inst.cost.push_back(sys.energies[s] + machine.energies[m]);
      if (is_ground) ci.ground_indices.push_back(ci.label(s, m));
    }
  }
  inst.initial_populations = inst.lambda;
  inst = validate(std::move(inst));
  return ci;
}

/// System, machine and bath under energy-preserving unitaries. The conserved
/// vector is the total energy, the cost the bath energy, the target the
/// system ground-subspace population.
inline CoolingInstance incoherent_instance(const SystemSpec& sys, const SystemSpec& machine,
                                           const SystemSpec& bath, double beta_machine,
                                           double beta_bath,
                                           std::size_t max_dim = kDefaultMaxCoolingDim) {
  if (sys.energies.empty() || machine.energies.empty() || bath.energies.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "incoherent_instance: empty factor");
  }
  const std::size_t ds = sys.energies.size();
  const std::size_t dm = machine.energies.size();
  const std::size_t db = bath.energies.size();
  detail::check_dim(ds * dm * db, max_dim);
  const Vector ps = detail::populations_or_thermal(sys, beta_machine, "system");
  const Vector pm = thermal_populations(machine.energies, beta_machine);
  const Vector pb = thermal_populations(bath.energies, beta_bath);
  const auto ground = detail::ground_levels(sys.energies);

  CoolingInstance ci;
  ci.kind = CoolingKind::Incoherent;
  ci.system_energies = sys.energies;
  ci.machine_energies = machine.energies;
  ci.bath_energies = bath.energies;
  ci.beta = beta_machine;
  ci.beta_bath = beta_bath;
  auto& inst = ci.instance;
  Vector conserved;
  for (std::size_t s = 0; s < ds; ++s) {
    const bool is_ground = std::find(ground.begin(), ground.end(), s) != ground.end();
    for (std::size_t m = 0; m < dm; ++m) {
      for (std::size_t b = 0; b < db; ++b) {
        inst.lambda.push_back(ps[s] * pm[m] * pb[b]);
        inst.target.push_back(is_ground ? 1.0 : 0.0);
        inst.cost.push_back(bath.energies[b]);
        conserved.push_back(sys.energies[s] + machine.energies[m] + bath.energies[b]);
        if (is_ground) ci.ground_indices.push_back(ci.label(s, m, b));
      }
    }
  }
  inst.conserved = std::move(conserved);
  inst.initial_populations = inst.lambda;
  inst = validate(std::move(inst));
  return ci;
}

inline GeneralizedInstance generalized(const CoolingInstance& ci) {
  return make_generalized(ci.instance);
}

/// Maximally mixed qubit (gap 0.3) with the four-level machine
/// (0, 0.1, 0.4, 1.1) thermal at beta = 1.
inline CoolingInstance working_example(Vector machine_energies = {0.0, 0.1, 0.4, 1.1},
                                       double system_gap = 0.3, double beta = 1.0) {
  SystemSpec sys{{0.0, system_gap}, Vector{0.5, 0.5}};
  return coherent_instance(sys, SystemSpec{std::move(machine_energies), std::nullopt}, beta);
}

/// Qubit system, qutrit machine and qubit bath with common level spacing.
/// Without explicit populations the system starts thermal at beta_machine.
inline CoolingInstance incoherent_example(double spacing = 1.0, double beta_machine = 1.0,
                                          double beta_bath = 0.0,
                                          std::optional<Vector> system_populations = std::nullopt) {
  SystemSpec sys{{0.0, spacing}, std::move(system_populations)};
  SystemSpec machine{{0.0, spacing, 2.0 * spacing}, std::nullopt};
  SystemSpec bath{{0.0, spacing}, std::nullopt};
  return incoherent_instance(sys, machine, bath, beta_machine, beta_bath);
}

namespace detail {

inline void require_coherent_qubit(const CoolingInstance& ci, const char* what) {
  if (ci.kind != CoolingKind::Coherent || ci.system_dim() != 2) {
    throw Error(ErrorCode::WrongInstanceKind, std::string(what) + " needs a coherent qubit-system instance");
  }
}

inline double binary_entropy(double x) {
  double s = 0.0;
  if (x > 0.0) s -= x * std::log(x);
  if (x < 1.0) s -= (1.0 - x) * std::log(1.0 - x);
  return s;
}

}  // namespace detail

/// Free-energy change of a qubit system taken from its initial ground
/// population alpha_in to the diagonal state diag(alpha, 1 - alpha), at the
/// environment inverse temperature (entropy in nats, k = 1).
inline double free_energy_bound(const CoolingInstance& ci, double alpha) {
  detail::require_coherent_qubit(ci, "free_energy_bound");
  if (!(alpha >= -kAlphaTol && alpha <= 1.0 + kAlphaTol)) {
    throw Error(ErrorCode::AlphaOutOfRange, "free_energy_bound: alpha outside [0,1]");
  }
  alpha = std::clamp(alpha, 0.0, 1.0);
  const auto& es = ci.system_energies;
  const std::size_t g = ci.ground_indices.empty() ? 0 : ci.ground_indices.front() / ci.machine_dim();
  const double e_ground = es[g];
  const double e_excited = es[1 - g];
  const double alpha_in = target_value(*ci.instance.initial_populations, ci.instance.target);
  auto free_energy = [&](double x) {
    const double energy = x * e_ground + (1.0 - x) * e_excited;
    return energy - detail::binary_entropy(x) / ci.beta;
  };
  return free_energy(alpha) - free_energy(alpha_in);
}

/// Within every system level, populations never increase with machine energy.
inline bool subspace_passive(std::span<const double> p, const CoolingInstance& ci,
                             double eps = 1e-12) {
  if (ci.kind != CoolingKind::Coherent) {
    throw Error(ErrorCode::WrongInstanceKind, "subspace_passive needs a coherent instance");
  }
  detail::require_length(p.size(), ci.instance.dim(), "populations");
  const auto& em = ci.machine_energies;
  for (std::size_t s = 0; s < ci.system_dim(); ++s) {
    for (std::size_t m = 0; m < ci.machine_dim(); ++m) {
      for (std::size_t n = 0; n < ci.machine_dim(); ++n) {
        if (em[m] > em[n] + kCoefficientEps && p[ci.label(s, m)] > p[ci.label(s, n)] + eps) {
          return false;
        }
      }
    }
  }
  return true;
}

/// Gradient of the |0 i> <-> |1 j> swap: E_i - E_j - E_S.
inline double qubit_gradient(const CoolingInstance& ci, std::size_t i, std::size_t j) {
  detail::require_coherent_qubit(ci, "qubit_gradient");
  if (i >= ci.machine_dim() || j >= ci.machine_dim()) {
    throw Error(ErrorCode::IndexOutOfRange, "qubit_gradient: machine index out of range");
  }
  const double gap = std::abs(ci.system_energies[1] - ci.system_energies[0]);
  return ci.machine_energies[i] - ci.machine_energies[j] - gap;
}

}  // namespace trajopt
