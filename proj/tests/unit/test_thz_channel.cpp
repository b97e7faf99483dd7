#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "losplan/thz_channel.hpp"

using namespace losplan;

namespace {

// Straight re-evaluation of the six-line water-vapour model from its tables.
double reference_coefficient(double f, double mu) {
  const double c = 299792458.0;
  const double nu = f / (100.0 * c);
  const double A[6] = {5.159e-5 * (1 - mu) * (-6.65e-5 * (1 - mu) + 0.0159), 0.1925 * mu * (0.1350 * mu + 0.0318),
                       0.2251 * mu * (0.1314 * mu + 0.0297), 2.053 * mu * (0.1717 * mu + 0.0306),
                       0.177 * mu * (0.0832 * mu + 0.0213), 2.146 * mu * (0.1206 * mu + 0.0277)};
  const double B[6] = {std::pow(-2.09e-4 * (1 - mu) + 0.05, 2), std::pow(0.4241 * mu + 0.0998, 2),
                       std::pow(0.4127 * mu + 0.0932, 2), std::pow(0.5394 * mu + 0.0961, 2),
                       std::pow(0.2615 * mu + 0.0668, 2), std::pow(0.3789 * mu + 0.0871, 2)};
  const double p[6] = {3.96, 6.11, 10.84, 12.68, 14.65, 14.94};
  double k = 0;
  for (int i = 0; i < 6; ++i) k += A[i] / (B[i] + (nu - p[i]) * (nu - p[i]));
  return k + mu / 0.0157 * (2e-4 + 0.915e-112 * std::pow(f, 9.42));
}

double line_ghz(double p) { return p * 100.0 * kSpeedOfLight / 1e9; }

}  // namespace

TEST_SUITE("thz_channel") {
  TEST_CASE("mixing ratio") {
    CHECK(mixing_ratio({25, 1013.25, 0}) == 0.0);
    const double es = 6.1094 * std::exp(17.625 * 25 / (243.04 + 25));
    CHECK(es == doctest::Approx(31.6).epsilon(0.002));
    const double mu = mixing_ratio({25, 1013.25, 20});
    CHECK(mu == doctest::Approx(0.2 * es / 1013.25).epsilon(1e-14));
    CHECK(mu == doctest::Approx(0.00624).epsilon(0.001));
    CHECK(mixing_ratio({25, 1013.25, 40}) == doctest::Approx(2 * mu).epsilon(1e-14));
    CHECK_THROWS_AS(mixing_ratio({25, 0, 20}), std::invalid_argument);
    CHECK_THROWS_AS(mixing_ratio({25, 1000, 120}), std::invalid_argument);
  }

  TEST_CASE("absorption coefficient") {
    CHECK(line_ghz(6.11) == doctest::Approx(183.2).epsilon(1e-3));
    for (double f : {120e9, 188e9, 300e9, 440e9}) {
      CHECK(absorption_coefficient(f, 0.006) == doctest::Approx(reference_coefficient(f, 0.006)).epsilon(1e-13));
    }
    // Only the first line survives at mu = 0.
    const double nu = wavenumber_per_cm(200e9);
    const double a1 = 5.159e-5 * (-6.65e-5 + 0.0159);
    const double b1 = std::pow(-2.09e-4 + 0.05, 2);
    CHECK(absorption_coefficient(200e9, 0.0) == doctest::Approx(a1 / (b1 + (nu - 3.96) * (nu - 3.96))).epsilon(1e-13));
    CHECK(absorption_coefficient(183e9, 0.006) > absorption_coefficient(150e9, 0.006));
    CHECK(absorption_coefficient(188e9, 0.00624) == doctest::Approx(0.0011744).epsilon(1e-4));
  }

  TEST_CASE("line peaks") {
    // The 439 GHz line sits 9 GHz below the much stronger 448 GHz line, so
    // +10 GHz lands on the neighbour's flank; it is checked as a local maximum.
    for (double p : {3.96, 6.11, 10.84, 12.68, 14.94}) {
      const double f = line_ghz(p) * 1e9;
      CAPTURE(p);
      CHECK(absorption_coefficient(f, 0.006) > absorption_coefficient(f - 10e9, 0.006));
      CHECK(absorption_coefficient(f, 0.006) > absorption_coefficient(f + 10e9, 0.006));
    }
    const double f = line_ghz(14.65) * 1e9;
    CHECK(absorption_coefficient(f, 0.006) > absorption_coefficient(f - 10e9, 0.006));
    bool local_max = false;
    for (double g = f - 1e9; g <= f + 1e9; g += 0.01e9) {
      const double k = absorption_coefficient(g, 0.006);
      local_max = local_max || (k > absorption_coefficient(g - 0.01e9, 0.006) &&
                                k > absorption_coefficient(g + 0.01e9, 0.006));
    }
    CHECK(local_max);
  }

  TEST_CASE("molecular loss") {
    CHECK(molecular_loss(188e9, 0.006, 1e-9) == doctest::Approx(1.0));
    const double mu = 0.00624;
    const double ref = std::exp(-reference_coefficient(188e9, mu) * 100 / 2);
    CHECK(std::abs(molecular_loss(188e9, mu, 100) - ref) <= 1e-12 * ref);
    CHECK(molecular_loss(188e9, mu, 100) == doctest::Approx(0.94297).epsilon(1e-4));
    double prev = 1.0;
    for (double L = 10; L < 2000; L *= 1.5) {
      const double v = molecular_loss(188e9, mu, L);
      CHECK(v < prev);
      CHECK(v > 0.0);
      prev = v;
    }
  }

  TEST_CASE("free space and channel gain") {
    const double fs = free_space_factor(188e9, 100);
    CHECK(std::abs(fs - 299792458.0 / (4 * std::numbers::pi * 188e9 * 100)) <= 1e-12 * fs);
    CHECK(fs == doctest::Approx(1.270e-6).epsilon(1e-3));
    LinkParams link;
    link.noise_power_w = 1e-12;
    const Atmosphere atm;
    CHECK(channel_gain(link, atm, 200) < 0.5 * channel_gain(link, atm, 100));
    double prev = channel_gain(link, atm, 1);
    for (double L = 2; L < 1000; L += 37) {
      const double h = channel_gain(link, atm, L);
      CHECK(h < prev);
      prev = h;
    }
    try {
      channel_gain(link, atm, 0);
      FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()) == "degenerate link");
    }
    const Atmosphere dry{25, 1013.25, 0};
    CHECK(channel_gain(link, dry, 50) ==
          doctest::Approx(free_space_factor(188e9, 50) * molecular_loss(188e9, 0.0, 50)).epsilon(1e-14));
  }

  TEST_CASE("capacity") {
    LinkParams link;
    link.tx_power_w = 1.0;
    link.noise_power_w = 1.0;
    CHECK(link_capacity(link, 0.0) == 0.0);
    CHECK(link_capacity(link, 1.0) == 1.0);
    CHECK(link_capacity(link, std::sqrt(3.0)) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(link_capacity(link, 2.0) > link_capacity(link, 1.0));
    link.tx_power_w = 2.0;
    CHECK(link_capacity(link, 1.0) > 1.0);
    CHECK_THROWS_AS(link_capacity(link, -1.0), std::invalid_argument);
  }

  TEST_CASE("validation warns outside the fit band") {
    LinkParams link;
    link.noise_power_w = dbm_to_watts(-85);
    CHECK(link.validate().empty());
    link.frequency_hz = 600e9;
    CHECK(link.validate().size() == 1);
    link.tx_power_w = 0;
    CHECK_THROWS_AS(link.validate(), std::invalid_argument);
    CHECK(dbm_to_watts(30) == doctest::Approx(1.0));
    CHECK(watts_to_dbm(1e-3) == doctest::Approx(0.0));
    CHECK(db_to_linear(30) == doctest::Approx(1000.0));
  }
}
