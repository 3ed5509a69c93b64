#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bsfgrow {

/// Physical chamber and biology constants prior to lumping.
///
/// Unit convention used throughout: time in hours, temperature in degC,
/// larval biomass in mg dry weight per larva. Heat capacities and transfer
/// coefficients are expressed in mutually consistent derived units so that
/// the lumped constants below come out in the units implied by the state
/// equations.
struct RawParameters {
  double k_inges = 1.0;        ///< ingestion rate coefficient [1/h]
  double k_Basy = 1.0;         ///< asymptotic dry biomass per larva [mg]
  double k_maint = 1.0;        ///< maintenance metabolism coefficient [1/h]
  double k_Cmed = 1.0;         ///< heat capacity of the growing medium
  double k_Am = 1.0;           ///< medium-air contact area
  double k_ha_m = 1.0;         ///< medium-air film heat transfer coefficient
  double k_Am_c = 1.0;         ///< medium-wall contact area
  double k_Um_c = 1.0;         ///< medium-wall overall heat transfer coefficient
  double L_num = 1.0;          ///< number of larvae in the crate
  double k_Qassim = 1.0;       ///< metabolic heat released per assimilated mass
  double k_Qmaint = 1.0;       ///< metabolic heat released per maintained mass
  double k_Cair = 1.0;         ///< heat capacity of the chamber air
  double k_Ahx = 1.0;          ///< heat exchanger contact area
  double k_ha_hx = 1.0;        ///< heat exchanger film coefficient
  double k_rho_air = 1.0;      ///< air density times specific heat, per air volume
  double k_Vdot_u = 1.0;       ///< ventilator volume flow per unit command
  double k_Ac = 1.0;           ///< chamber wall contact area
  double k_ha_c = 1.0;         ///< chamber wall film coefficient
  double k_hx = 1.0;           ///< heat exchanger temperature per unit command
  double k_alpha_assim = 1.0;  ///< assimilated fraction of ingested mass
};

/// Parameters of the unimodal temperature response of larval growth:
/// exponential rise above k_Tbase, sharp cutoff approaching k_Tmax.
/// Defaults give a plausible curve peaking near 20 degC and collapsing
/// toward k_Tmax.
struct LoganParameters {
  double k_rmaxT = 1.0;   ///< peak-scale of the rate [1/h]
  double k_gamma = 1.0;   ///< low-temperature suppression weight
  double k_rhoT = 0.5;    ///< low-flank steepness [1/degC]
  double k_Tbase = 10.0;  ///< base temperature of the rise [degC]
  double k_Tmax = 40.0;   ///< upper lethal temperature [degC]
  double k_DeltaT = 5.0;  ///< width of the high-temperature cutoff [degC]
};

/// Lumped constants of the three-state model. k2 doubles as the asymptotic
/// biomass (identical to RawParameters::k_Basy); the growth and heat
/// equations use the same symbol for it.
struct LumpedParameters {
  double k1 = 1.0;   ///< ingestion rate [1/h]
  double k2 = 1.0;   ///< asymptotic dry biomass [mg]
  double k3 = 1.0;   ///< maintenance rate [1/h]
  double k4 = 1.0;   ///< medium temperature loss rate [1/h]
  double k5 = 1.0;   ///< air-to-medium coupling [1/h]
  double k6 = 1.0;   ///< assimilation heating per biomass [degC/(mg h)]
  double k7 = 1.0;   ///< maintenance heating per biomass [degC/(mg h)]
  double k8 = 1.0;   ///< outside-to-medium disturbance coupling [1/h]
  double k9 = 1.0;   ///< medium-to-air coupling [1/h]
  double k10 = 1.0;  ///< air temperature loss rate [1/h]
  double k11 = 1.0;  ///< heater gain [degC/h per unit command]
  double k12 = 1.0;  ///< ventilation exchange rate per unit command [1/h]
  double k13 = 1.0;  ///< outside-to-air coupling [1/h]
  LoganParameters logan;
};

/// One additive contribution to a composite lumped constant, tagged with the
/// heat-flux pathway it came from. Values are stored already divided by the
/// relevant heat capacity, so recombining is a plain sum.
struct LumpedTerm {
  std::string flux;
  double value = 0.0;
};

/// Left-to-right sum of the term values. This is the exact canonical
/// summation order used by derive_lumped; no reordering.
double recombine(const std::vector<LumpedTerm>& terms);

/// Derivation record produced alongside the lumped constants: the additive
/// terms of every composite constant in the exact order they were summed,
/// the modeling simplifications the lumping bakes in, and the rows where the
/// synthesized equations depart from a term-by-term flux balance.
struct LumpingDiagnostics {
  std::vector<LumpedTerm> k4_terms;
  std::vector<LumpedTerm> k5_terms;
  std::vector<LumpedTerm> k8_terms;
  std::vector<LumpedTerm> k9_terms;
  std::vector<LumpedTerm> k10_terms;
  std::vector<LumpedTerm> k11_terms;
  std::vector<LumpedTerm> k12_terms;
  std::vector<LumpedTerm> k13_terms;

  // Simplifications carried silently by the constants.
  bool film_coefficient_dry_part_only = true;  ///< evaporative share of the medium-air film dropped
  bool medium_heat_capacity_constant = true;   ///< water-content drift of k_Cmed ignored
  bool wall_temp_interpolated = true;          ///< wall temperature taken as (2/3) air + (1/3) outside
  bool air_heat_capacity_constant = true;      ///< vapor contribution to k_Cair ignored
  bool heater_temp_linear = true;              ///< exchanger temperature proportional to the command

  // Rows where the lumped synthesis disagrees with the flux balance.
  std::vector<std::string> flux_mismatches;
};

struct ValidationReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  bool valid() const { return violations.empty(); }
};

ValidationReport validate(const LoganParameters& logan);
ValidationReport validate(const RawParameters& raw);
ValidationReport validate(const LumpedParameters& params);

/// Computes the lumped constants from raw physical parameters. Deterministic
/// and total on valid input; throws ConfigError naming the offending field or
/// row otherwise. Composite constants are built by recombine() over the
/// diagnostic terms, which makes the recombination identity exact.
std::pair<LumpedParameters, LumpingDiagnostics> derive_lumped(
    const RawParameters& raw, const LoganParameters& logan);

/// A loaded parameter configuration. `raw` and `diagnostics` are present only
/// when the file specified raw constants; `lumped` is canonical either way.
struct ParameterBundle {
  std::optional<RawParameters> raw;
  LumpedParameters lumped;
  std::optional<LumpingDiagnostics> diagnostics;
};

/// Reads a parameter file (JSON, either a "raw" or a "lumped" object plus
/// "logan"). Validates after parsing; throws ConfigError with key context on
/// malformed input, unknown keys, or range violations.
ParameterBundle load_config(const std::string& path);

/// Writes the bundle back in the same form it was loaded from (raw form when
/// `raw` is present). load(save(b)) reproduces every numeric field exactly.
void save_config(const ParameterBundle& bundle, const std::string& path);

}  // namespace bsfgrow
