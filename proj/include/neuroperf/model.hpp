#pragma once

#include <optional>
#include <string_view>

#include "neuroperf/geometry.hpp"

namespace neuroperf {

inline constexpr double kPaPerMmHg = 133.322;
inline constexpr double kM2PerMm2 = 1e-6;

// Values as tabulated: concentrations in ug/mm^3, time in years, lengths in mm, pressures in
// mmHg, permeabilities in mm^2/(Pa s), transfer coefficients in 1/(Pa s). The defaults are
// the idealized-geometry test case set.
struct PhysicalParams {
  double k0 = 1.0;
  double k1 = 1.0;
  double k1_tilde = 1.5;
  double k12 = 1.0;
  double kappa0 = 1.25;
  double kappa1 = 1.25;
  double kappa1_tilde = 3.75;
  double d_ext = 8.0;
  double d_axn = 0.0;

  double k_A = 1e-2;
  double k_V = 1e-2;
  double k_C = 5e-3;
  double k_C_ab = 1e-4;
  double beta_AC = 5e-7;
  double beta_CV = 4e-7;
  double beta_AC_ab = 4e-7;
  double beta_CV_ab = 3e-7;
  // Multiplies u_tilde in ug/mm^3 inside tanh.
  double alpha_kC = 2.0;
  double alpha_beta_AC = 2.0;
  double alpha_beta_CV = 2.0;

  double p_arteries = 70.0;
  double p_veins = 7.0;
  double rho = 1000.0;  // kg/m^3
  double rate_floor = 1e-6;

  // Throws ConfigError naming the offending field.
  void validate() const;

  static PhysicalParams idealized();   // rectangle test cases
  static PhysicalParams brainlike();   // whole-brain parameter set

  friend bool operator==(const PhysicalParams&, const PhysicalParams&) = default;
};

struct KineticRates {
  double k0 = 1.0;
  double k1 = 1.0;
  double k1_tilde = 1.5;
  double k12 = 1.0;
};

inline KineticRates base_rates(const PhysicalParams& p) { return {p.k0, p.k1, p.k1_tilde, p.k12}; }

// Sigmoidal vasoconstriction law: base - (base - floor) tanh(alpha max(u_tilde, 0)).
double constricted(double u_tilde, double base, double floor, double alpha);
double capillary_permeability(double u_tilde, const PhysicalParams& p);
double transfer_coefficient(double u_tilde, double base, double floor, double alpha);
double transfer_AC(double u_tilde, const PhysicalParams& p);
double transfer_CV(double u_tilde, const PhysicalParams& p);

// (beta_local / rho) (p_A - p_C). Pressures in Pa.
double cbf_rate(double p_A, double p_C, double beta_local, double rho);

// clamp((Q_H - Q) / Q_H, 0, 1). Throws InvalidState when Q_H <= 0.
double hypoperfusion(double Q, double Q_H);

struct ModulatedRates {
  double k0B;
  double k1B;
  double k1B_tilde;
  double r;
};
ModulatedRates modulated_rates(double Q, double Q_H, const PhysicalParams& p);
ModulatedRates modulated_rates_at(double r, const PhysicalParams& p);

double reproduction_number(const KineticRates& k);
inline double reproduction_number(const PhysicalParams& p) { return reproduction_number(base_rates(p)); }

struct EquilibriumPair {
  double u_healthy;
  double ut_healthy;
  double u_pathogenic;
  double ut_pathogenic;
  bool pathogenic_physical;
};
EquilibriumPair homogeneous_equilibria(const KineticRates& k);

// d_ext I + d_axn (a x a), in mm^2/yr. Without a fibre the tensor is isotropic.
Tensor2 diffusion_tensor(const PhysicalParams& p, std::optional<Point2> axon_direction = std::nullopt);
// k I, or k (a x a) along a fibre direction.
Tensor2 permeability_tensor(double k, std::optional<Point2> fibre = std::nullopt);

// Dimensionless groups evaluated at a given vasoconstriction level s = tanh(alpha u_tilde)
// (0 healthy, 1 saturated) and hypoperfusion ratio r.
struct DimlessParams {
  double epsilon;
  double R;
  double delta_ext;
  double delta_axn;
  double sigma_A;
  double sigma_C;
  double sigma_V;
  double B;
  double gamma_AC;
  double gamma_CV;
  double lambda1B;
  double lambda1B_tilde;
  double mu0B;

  // Scales needed to invert the map.
  double k0;
  double k1_tilde;
  double d_ext;
  double beta_AC;
};

DimlessParams nondimensionalize(const PhysicalParams& p, double constriction = 0.0, double r = 0.0);
// Recovers k1, k12, d_axn, k_A, k_C, k_V, beta_CV from the groups; every other field is
// taken from `rest`. Exact inverse on the healthy state (constriction = r = 0).
PhysicalParams redimensionalize(const DimlessParams& d, const PhysicalParams& rest);

enum class Classification { Outbreak, Extinction, Indeterminate };
std::string_view to_string(Classification c);

// Outbreak when final max u_tilde exceeds half the pathogenic level u_tilde_pathogenic,
// extinction when it falls below 1e-3 of the seed amplitude.
Classification classify_outcome(double max_ut_final, double ut_pathogenic, double seed_amplitude);

}  // namespace neuroperf
