#include "losplan/thz_channel.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace losplan {

namespace {

struct AbsorptionLine {
  double center_per_cm;
  double (*strength)(double mu);
  double (*width)(double mu);
};

// Six-line polynomial fit of water-vapour absorption, valid over 100-450 GHz.
constexpr std::array<AbsorptionLine, 6> kLines{{
    {3.96, [](double mu) { return 5.159e-5 * (1.0 - mu) * (-6.65e-5 * (1.0 - mu) + 0.0159); },
     [](double mu) { const double w = -2.09e-4 * (1.0 - mu) + 0.05; return w * w; }},
    {6.11, [](double mu) { return 0.1925 * mu * (0.1350 * mu + 0.0318); },
     [](double mu) { const double w = 0.4241 * mu + 0.0998; return w * w; }},
    {10.84, [](double mu) { return 0.2251 * mu * (0.1314 * mu + 0.0297); },
     [](double mu) { const double w = 0.4127 * mu + 0.0932; return w * w; }},
    {12.68, [](double mu) { return 2.053 * mu * (0.1717 * mu + 0.0306); },
     [](double mu) { const double w = 0.5394 * mu + 0.0961; return w * w; }},
    {14.65, [](double mu) { return 0.177 * mu * (0.0832 * mu + 0.0213); },
     [](double mu) { const double w = 0.2615 * mu + 0.0668; return w * w; }},
    {14.94, [](double mu) { return 2.146 * mu * (0.1206 * mu + 0.0277); },
     [](double mu) { const double w = 0.3789 * mu + 0.0871; return w * w; }},
}};

}  // namespace

void Atmosphere::validate() const {
  if (!(pressure_hpa > 0.0)) throw std::invalid_argument("atmosphere: pressure must be positive");
  if (!(relative_humidity_pct >= 0.0 && relative_humidity_pct <= 100.0)) {
    throw std::invalid_argument("atmosphere: relative humidity must lie in [0, 100]");
  }
  if (!std::isfinite(temperature_c)) throw std::invalid_argument("atmosphere: temperature must be finite");
}

std::vector<std::string> LinkParams::validate() const {
  if (!(frequency_hz > 0.0)) throw std::invalid_argument("link: frequency must be positive");
  if (!(tx_power_w > 0.0)) throw std::invalid_argument("link: transmit power must be positive");
  if (!(noise_power_w > 0.0)) throw std::invalid_argument("link: noise power must be positive");
  if (!(gain_tx > 0.0) || !(gain_rx > 0.0)) throw std::invalid_argument("link: antenna gains must be positive");
  std::vector<std::string> warnings;
  if (!in_absorption_fit_band(frequency_hz)) {
    warnings.emplace_back("frequency outside the 100-450 GHz absorption fit band");
  }
  return warnings;
}

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
double watts_to_dbm(double w) { return 10.0 * std::log10(w / 1e-3); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double saturation_vapor_pressure_hpa(double temperature_c) {
  return 6.1094 * std::exp(17.625 * temperature_c / (243.04 + temperature_c));
}

double mixing_ratio(const Atmosphere& atm) {
  atm.validate();
  return (atm.relative_humidity_pct / 100.0) * saturation_vapor_pressure_hpa(atm.temperature_c) / atm.pressure_hpa;
}

double wavenumber_per_cm(double frequency_hz) { return frequency_hz / (100.0 * kSpeedOfLight); }

double absorption_coefficient(double frequency_hz, double mu) {
  const double nu = wavenumber_per_cm(frequency_hz);
  double k = 0.0;
  for (const AbsorptionLine& line : kLines) {
    const double d = nu - line.center_per_cm;
    k += line.strength(mu) / (line.width(mu) + d * d);
  }
  k += mu / 0.0157 * (2e-4 + 0.915e-112 * std::pow(frequency_hz, 9.42));
  return k;
}

double molecular_loss(double frequency_hz, double mu, double length_m) {
  return std::exp(-absorption_coefficient(frequency_hz, mu) * length_m / 2.0);
}

double free_space_factor(double frequency_hz, double length_m) {
  return kSpeedOfLight / (4.0 * std::numbers::pi * frequency_hz * length_m);
}

double channel_gain(const LinkParams& link, const Atmosphere& atm, double length_m) {
  if (!(length_m > 0.0)) throw std::invalid_argument("degenerate link");
  return free_space_factor(link.frequency_hz, length_m) *
         molecular_loss(link.frequency_hz, mixing_ratio(atm), length_m) * std::sqrt(link.gain_tx * link.gain_rx);
}

double link_capacity(const LinkParams& link, double h) {
  if (h < 0.0) throw std::invalid_argument("link_capacity: h must be non-negative");
  return std::log2(1.0 + link.tx_power_w * h * h / link.noise_power_w);
}

bool in_absorption_fit_band(double frequency_hz) { return frequency_hz >= 100e9 && frequency_hz <= 450e9; }

}  // namespace losplan
