#include "neuroperf/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neuroperf/errors.hpp"

namespace neuroperf {

namespace {
void require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}
}  // namespace

void PhysicalParams::validate() const {
  require(k0 > 0, "kinetics.k0", "must be positive");
  require(k1 > 0, "kinetics.k1", "must be positive");
  require(k1_tilde > 0, "kinetics.k1_tilde", "must be positive");
  require(k12 > 0, "kinetics.k12", "must be positive");
  require(kappa0 >= 0, "kinetics.kappa0", "must be nonnegative");
  require(kappa1 >= 0, "kinetics.kappa1", "must be nonnegative");
  require(kappa1_tilde >= 0, "kinetics.kappa1_tilde", "must be nonnegative");
  require(d_ext > 0, "diffusion.d_ext", "must be positive");
  require(d_axn >= 0, "diffusion.d_axn", "must be nonnegative");
  require(k_A > 0, "perfusion.k_A", "must be positive");
  require(k_V > 0, "perfusion.k_V", "must be positive");
  require(k_C > 0, "perfusion.k_C", "must be positive");
  require(k_C_ab > 0 && k_C_ab <= k_C, "perfusion.k_C_ab", "must lie in (0, k_C]");
  require(beta_AC > 0, "perfusion.beta_AC", "must be positive");
  require(beta_CV > 0, "perfusion.beta_CV", "must be positive");
  require(beta_AC_ab > 0 && beta_AC_ab <= beta_AC, "perfusion.beta_AC_ab", "must lie in (0, beta_AC]");
  require(beta_CV_ab > 0 && beta_CV_ab <= beta_CV, "perfusion.beta_CV_ab", "must lie in (0, beta_CV]");
  require(alpha_kC >= 0, "perfusion.alpha_kC", "must be nonnegative");
  require(alpha_beta_AC >= 0, "perfusion.alpha_beta_AC", "must be nonnegative");
  require(alpha_beta_CV >= 0, "perfusion.alpha_beta_CV", "must be nonnegative");
  require(p_arteries > p_veins, "perfusion.p_arteries", "must exceed perfusion.p_veins");
  require(rho > 0, "perfusion.rho", "must be positive");
  require(rate_floor > 0, "kinetics.rate_floor", "must be positive");
}

PhysicalParams PhysicalParams::idealized() { return PhysicalParams{}; }

PhysicalParams PhysicalParams::brainlike() {
  PhysicalParams p;
  p.k12 = 1.2;
  p.d_axn = 80.0;
  p.k_A = 1.23e-3;
  p.k_V = 1.23e-3;
  p.k_C = 4.28e-7;
  p.k_C_ab = 1e-7;
  p.beta_AC = 1e-6;
  p.beta_CV = 3e-6;
  p.beta_AC_ab = 8e-7;
  p.beta_CV_ab = 2.4e-6;
  p.alpha_kC = 2.5;
  p.alpha_beta_AC = 2.5;
  p.alpha_beta_CV = 2.5;
  return p;
}

double constricted(double u_tilde, double base, double floor, double alpha) {
  return base - (base - floor) * std::tanh(alpha * std::max(u_tilde, 0.0));
}

double capillary_permeability(double u_tilde, const PhysicalParams& p) {
  return constricted(u_tilde, p.k_C, p.k_C_ab, p.alpha_kC);
}

double transfer_coefficient(double u_tilde, double base, double floor, double alpha) {
  return constricted(u_tilde, base, floor, alpha);
}

double transfer_AC(double u_tilde, const PhysicalParams& p) {
  return constricted(u_tilde, p.beta_AC, p.beta_AC_ab, p.alpha_beta_AC);
}

double transfer_CV(double u_tilde, const PhysicalParams& p) {
  return constricted(u_tilde, p.beta_CV, p.beta_CV_ab, p.alpha_beta_CV);
}

double cbf_rate(double p_A, double p_C, double beta_local, double rho) { return beta_local / rho * (p_A - p_C); }

double hypoperfusion(double Q, double Q_H) {
  if (!(Q_H > 0.0)) throw InvalidState("healthy CBF rate must be positive, got " + std::to_string(Q_H));
  return std::clamp((Q_H - Q) / Q_H, 0.0, 1.0);
}

ModulatedRates modulated_rates_at(double r, const PhysicalParams& p) {
  return {p.k0 + p.kappa0 * r, std::max(p.k1 - p.kappa1 * r, p.rate_floor),
          std::max(p.k1_tilde - p.kappa1_tilde * r, p.rate_floor), r};
}

ModulatedRates modulated_rates(double Q, double Q_H, const PhysicalParams& p) {
  return modulated_rates_at(hypoperfusion(Q, Q_H), p);
}

double reproduction_number(const KineticRates& k) { return k.k0 * k.k12 / (k.k1 * k.k1_tilde); }

EquilibriumPair homogeneous_equilibria(const KineticRates& k) {
  EquilibriumPair e;
  e.u_healthy = k.k0 / k.k1;
  e.ut_healthy = 0.0;
  e.u_pathogenic = k.k1_tilde / k.k12;
  e.ut_pathogenic = k.k0 / k.k1_tilde - k.k1 / k.k12;
  e.pathogenic_physical = e.ut_pathogenic > 0.0;
  return e;
}

Tensor2 diffusion_tensor(const PhysicalParams& p, std::optional<Point2> axon_direction) {
  Tensor2 d = Tensor2::identity(p.d_ext);
  if (axon_direction && p.d_axn != 0.0) {
    const double n = norm(*axon_direction);
    if (n > 0.0) d = d + p.d_axn * Tensor2::outer((1.0 / n) * *axon_direction);
  }
  return d;
}

Tensor2 permeability_tensor(double k, std::optional<Point2> fibre) {
  if (!fibre) return Tensor2::identity(k);
  const double n = norm(*fibre);
  if (n == 0.0) return Tensor2::identity(k);
  return k * Tensor2::outer((1.0 / n) * *fibre);
}

DimlessParams nondimensionalize(const PhysicalParams& p, double constriction, double r) {
  const double s = std::clamp(constriction, 0.0, 1.0);
  const auto m = modulated_rates_at(r, p);
  DimlessParams d{};
  d.epsilon = p.k1_tilde / p.k1;
  d.R = reproduction_number(p);
  d.delta_ext = 1.0;
  d.delta_axn = p.d_axn / p.d_ext;
  const double scale = p.k1_tilde / (p.d_ext * p.beta_AC);
  d.sigma_A = scale * p.k_A;
  d.sigma_V = scale * p.k_V;
  d.sigma_C = scale * (p.k_C - (p.k_C - p.k_C_ab) * s);
  d.B = p.beta_CV / p.beta_AC;
  d.gamma_AC = (p.beta_AC - (p.beta_AC - p.beta_AC_ab) * s) / p.beta_AC;
  d.gamma_CV = (p.beta_CV - (p.beta_CV - p.beta_CV_ab) * s) / p.beta_CV;
  d.lambda1B = m.k1B / p.k1;
  d.lambda1B_tilde = m.k1B_tilde / p.k1_tilde;
  d.mu0B = m.k0B / p.k0;
  d.k0 = p.k0;
  d.k1_tilde = p.k1_tilde;
  d.d_ext = p.d_ext;
  d.beta_AC = p.beta_AC;
  return d;
}

PhysicalParams redimensionalize(const DimlessParams& d, const PhysicalParams& rest) {
  PhysicalParams p = rest;
  p.k0 = d.k0;
  p.k1_tilde = d.k1_tilde;
  p.d_ext = d.d_ext;
  p.beta_AC = d.beta_AC;
  p.k1 = d.k1_tilde / d.epsilon;
  p.k12 = d.R * p.k1 * p.k1_tilde / p.k0;
  p.d_axn = d.delta_axn * d.d_ext;
  const double inv = d.d_ext * d.beta_AC / d.k1_tilde;
  p.k_A = d.sigma_A * inv;
  p.k_V = d.sigma_V * inv;
  p.k_C = d.sigma_C * inv;
  p.beta_CV = d.B * d.beta_AC;
  return p;
}

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::Outbreak: return "OUTBREAK";
    case Classification::Extinction: return "EXTINCTION";
    case Classification::Indeterminate: return "INDETERMINATE";
  }
  return "INDETERMINATE";
}

Classification classify_outcome(double max_ut_final, double ut_pathogenic, double seed_amplitude) {
  if (ut_pathogenic > 0.0 && max_ut_final > 0.5 * ut_pathogenic) return Classification::Outbreak;
  if (max_ut_final < 1e-3 * seed_amplitude) return Classification::Extinction;
  if (seed_amplitude <= 0.0 && max_ut_final <= 0.0) return Classification::Extinction;
  return Classification::Indeterminate;
}

}  // namespace neuroperf
