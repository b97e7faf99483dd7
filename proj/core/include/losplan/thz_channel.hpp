#pragma once

#include <string>
#include <vector>

namespace losplan {

inline constexpr double kSpeedOfLight = 299792458.0;

struct Atmosphere {
  double temperature_c = 25.0;
  double pressure_hpa = 1013.25;
  double relative_humidity_pct = 20.0;

  void validate() const;
};

struct LinkParams {
  double frequency_hz = 188e9;
  double tx_power_w = 5e-3;
  double noise_power_w = 0.0;
  double gain_tx = 1.0;
  double gain_rx = 1.0;

  /// Throws on non-positive fields; returns warnings (e.g. frequency outside
  /// the 100-450 GHz band covered by the absorption-line fit).
  std::vector<std::string> validate() const;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double w);
double db_to_linear(double db);

/// Saturation vapour pressure over water in hPa (improved Magnus form).
double saturation_vapor_pressure_hpa(double temperature_c);

/// Volume mixing ratio of water vapour.
double mixing_ratio(const Atmosphere& atm);

/// Wavenumber in cm^-1 for a frequency in Hz.
double wavenumber_per_cm(double frequency_hz);

/// Molecular absorption coefficient in 1/m: six water-vapour lines plus the
/// continuum correction term.
double absorption_coefficient(double frequency_hz, double mu);

/// Beer-Lambert amplitude factor exp(-k L / 2).
double molecular_loss(double frequency_hz, double mu, double length_m);

/// Free-space amplitude factor c / (4 pi f L).
double free_space_factor(double frequency_hz, double length_m);

/// Amplitude channel coefficient between two antennas L metres apart.
/// Throws std::invalid_argument("degenerate link") when L <= 0.
double channel_gain(const LinkParams& link, const Atmosphere& atm, double length_m);

/// log2(1 + P_t h^2 / N_0) in bits/s/Hz.
double link_capacity(const LinkParams& link, double h);

bool in_absorption_fit_band(double frequency_hz);

}  // namespace losplan
