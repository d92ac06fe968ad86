#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "swarmguide/errors.hpp"
#include "swarmguide/impedance.hpp"

namespace sg = swarmguide;

namespace {

// 40-digit matrix exponential of the augmented ZOH matrix, rounded to 20 digits.
struct Frozen {
  double m, d, k, T;
  std::array<double, 6> v;  // ad00 ad01 ad10 ad11 bd0 bd1
};

const Frozen kFrozen[] = {
    {1.9, 12.6, 21.0, 1.0 / 240,
     {0.99990493614940935501, 0.0041094960188786661406, -0.045420745471816836291, 0.97265248886631925324,
      4.5268500281259518409e-6, 0.0021628926415150874424}},
    {1.9, 12.6, 21.0, 1.0 / 60,
     {0.99852031515124057419, 0.015770559289065214757, -0.17430618161598395258, 0.89393660618165020264,
      0.000070461183274258372086, 0.0083002943626659025039}},
    {1.9, 12.6, 21.0, 0.1,
     {0.95556152900529507159, 0.071771989663441806273, -0.7932693594380410167, 0.47959991334247046156,
      0.0021161176664145204007, 0.037774731401811476986}},
    {1.0, 2.0, 1.0, 1.0 / 60,
     {0.99986264471864444763, 0.016391190897026958158, -0.016391190897026958158, 0.96708026292459053132,
      0.00013735528135555236836, 0.016391190897026958158}},
    {1.0, 5.0, 4.0, 1.0 / 60,
     {0.99945961008495074005, 0.015988156263333250581, -0.063952625053333002324, 0.91951882876828448715,
      0.00013509747876231498629, 0.015988156263333250581}},
};

void expect_close(const sg::StateTransition& tr, const std::array<double, 6>& v, double tol) {
  EXPECT_NEAR(tr.ad(0, 0), v[0], tol);
  EXPECT_NEAR(tr.ad(0, 1), v[1], tol);
  EXPECT_NEAR(tr.ad(1, 0), v[2], tol);
  EXPECT_NEAR(tr.ad(1, 1), v[3], tol);
  EXPECT_NEAR(tr.bd[0], v[4], tol);
  EXPECT_NEAR(tr.bd[1], v[5], tol);
}

}  // namespace

TEST(ImpedanceParams, DerivedQuantities) {
  const auto p = sg::make_impedance_params(1.9, 12.6, 21.0);
  EXPECT_NEAR(p.damping_ratio, 0.997364949307, 1e-11);
  EXPECT_NEAR(p.natural_frequency, std::sqrt(21.0 / 1.9), 1e-15);
  EXPECT_DOUBLE_EQ(p.a, -12.6 / 1.9);
  EXPECT_DOUBLE_EQ(p.b, -21.0 / 1.9);
  EXPECT_DOUBLE_EQ(p.c, 1.0 / 1.9);
  EXPECT_TRUE(p.near_critical());
  EXPECT_TRUE(p.complex_eigenvalues());
  EXPECT_EQ(p.damping_class, sg::DampingClass::Underdamped);
}

TEST(ImpedanceParams, ClassificationTable) {
  EXPECT_EQ(sg::make_impedance_params(1, 2, 1).damping_class, sg::DampingClass::Critical);
  EXPECT_EQ(sg::make_impedance_params(1, 2, 1).damping_ratio, 1.0);
  EXPECT_EQ(sg::make_impedance_params(1, 0, 1).damping_class, sg::DampingClass::Undamped);
  EXPECT_EQ(sg::make_impedance_params(1, 1, 1).damping_class, sg::DampingClass::Underdamped);
  EXPECT_EQ(sg::make_impedance_params(1, 5, 4).damping_class, sg::DampingClass::Overdamped);
  EXPECT_EQ(sg::make_impedance_params(1, 2.0 + 1e-7, 1).damping_class, sg::DampingClass::Critical);
  EXPECT_EQ(sg::to_string(sg::DampingClass::Overdamped), "overdamped");
}

TEST(ImpedanceParams, EigenvaluesSolveCharacteristicPolynomial) {
  for (auto [m, d, k] : {std::array{1.9, 12.6, 21.0}, std::array{1.0, 5.0, 4.0}, std::array{2.0, 0.5, 3.0}}) {
    const auto p = sg::make_impedance_params(m, d, k);
    for (auto l : {p.lambda1, p.lambda2}) {
      const auto residual = m * l * l + d * l + k;
      EXPECT_LT(std::abs(residual), 1e-12) << m << ' ' << d << ' ' << k;
    }
  }
}

TEST(ImpedanceParams, RejectsBadInputNamingTheField) {
  auto field_of = [](double m, double d, double k) {
    try {
      (void)sg::make_impedance_params(m, d, k);
    } catch (const sg::ParameterError& e) {
      return e.field();
    }
    return std::string("none");
  };
  EXPECT_EQ(field_of(0, 1, 1), "mass");
  EXPECT_EQ(field_of(-1, 1, 1), "mass");
  EXPECT_EQ(field_of(1, -1, 1), "damping");
  EXPECT_EQ(field_of(1, 1, 0), "stiffness");
  EXPECT_EQ(field_of(std::nan(""), 1, 1), "mass");
  EXPECT_EQ(field_of(1, 1, INFINITY), "stiffness");
}

TEST(Discretize, MatchesFrozenHighPrecisionValues) {
  for (const auto& f : kFrozen) {
    SCOPED_TRACE(f.T);
    expect_close(sg::discretize(sg::make_impedance_params(f.m, f.d, f.k), f.T), f.v, 1e-12);
  }
}

TEST(Discretize, MatchesSeriesOracleAcrossRegimes) {
  const auto failure = oracle::for_all<std::array<double, 4>>(
      20240611, 400,
      [](oracle::Gen& g) {
        const double m = g.uniform(0.2, 5.0);
        const double k = g.uniform(0.5, 60.0);
        const double crit = 2.0 * std::sqrt(m * k);
        // Bias a third of the cases right next to critical damping.
        const int regime = g.integer(0, 2);
        const double d = regime == 0 ? crit * (1.0 + g.uniform(-1e-5, 1e-5)) : g.uniform(0.0, 2.5 * crit);
        return std::array{m, d, k, g.uniform(1e-3, 0.2)};
      },
      [](const std::array<double, 4>& in) -> std::string {
        const auto tr = sg::discretize(sg::make_impedance_params(in[0], in[1], in[2]), in[3]);
        const auto z = oracle::zoh_series(in[0], in[1], in[2], in[3]);
        const double got[6] = {tr.ad(0, 0), tr.ad(0, 1), tr.ad(1, 0), tr.ad(1, 1), tr.bd[0], tr.bd[1]};
        const double want[6] = {z.ad[0], z.ad[1], z.ad[2], z.ad[3], z.bd[0], z.bd[1]};
        for (int i = 0; i < 6; ++i) {
          if (std::abs(got[i] - want[i]) > 1e-9) {
            return "element " + std::to_string(i) + " off by " + std::to_string(got[i] - want[i]);
          }
        }
        return {};
      });
  EXPECT_EQ(failure, "");
}

TEST(Discretize, ExactCriticalBranch) {
  const auto tr = sg::discretize(sg::make_impedance_params(1, 2, 1), 0.1);
  const auto z = oracle::zoh_series(1, 2, 1, 0.1);
  EXPECT_NEAR(tr.ad(0, 0), z.ad[0], 1e-14);
  EXPECT_NEAR(tr.ad(1, 1), z.ad[3], 1e-14);
  EXPECT_NEAR(tr.bd[1], z.bd[1], 1e-14);
}

TEST(Discretize, RejectsNonPositiveSampleTime) {
  const auto p = sg::make_impedance_params(1.9, 12.6, 21.0);
  EXPECT_THROW((void)sg::discretize(p, 0.0), sg::ParameterError);
  EXPECT_THROW((void)sg::discretize(p, -0.1), sg::ParameterError);
}

TEST(Step, IsLinearInStateAndForce) {
  const auto tr = sg::discretize(sg::make_impedance_params(1.9, 12.6, 21.0), 1.0 / 60);
  const sg::ImpedanceState a{0.1, -0.3}, b{-0.2, 0.05};
  const auto lhs = sg::step({a.displacement + b.displacement, a.velocity + b.velocity}, 3.0, tr);
  const auto ra = sg::step(a, 1.0, tr);
  const auto rb = sg::step(b, 2.0, tr);
  EXPECT_NEAR(lhs.displacement, ra.displacement + rb.displacement, 1e-15);
  EXPECT_NEAR(lhs.velocity, ra.velocity + rb.velocity, 1e-15);
}

TEST(Step, RestStaysAtRest) {
  const auto tr = sg::discretize(sg::make_impedance_params(1.9, 12.6, 21.0), 1.0 / 60);
  sg::ImpedanceState s;
  for (int i = 0; i < 1000; ++i) s = sg::step(s, 0.0, tr);
  EXPECT_EQ(s, sg::ImpedanceState{});
}

TEST(Step, ConstantForceSettlesAtStaticDeflection) {
  const auto tr = sg::discretize(sg::make_impedance_params(1.9, 12.6, 21.0), 1.0 / 60);
  sg::ImpedanceState s;
  const double force = sg::external_force(0.5, -7.0);
  EXPECT_DOUBLE_EQ(force, -3.5);
  for (int i = 0; i < 60 * 20; ++i) s = sg::step(s, force, tr);
  EXPECT_NEAR(s.displacement, -3.5 / 21.0, 1e-9);
  EXPECT_NEAR(s.velocity, 0.0, 1e-9);
}

TEST(Step, TracksRk4UnderSquareWave) {
  const double T = 1.0 / 60;
  const auto tr = sg::discretize(sg::make_impedance_params(1.9, 12.6, 21.0), T);
  auto force = [](int k) { return (k / 30) % 2 == 0 ? 3.5 : -3.5; };
  const auto ref = oracle::rk4_response(1.9, 12.6, 21.0, T, 10, 600, force);
  sg::ImpedanceState s;
  double worst = 0;
  for (int k = 0; k < 600; ++k) {
    s = sg::step(s, force(k), tr);
    worst = std::max(worst, std::abs(s.displacement - ref[static_cast<std::size_t>(k) + 1]));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Saturate, ClampsSymmetrically) {
  EXPECT_EQ(sg::saturate(0.3, 0.25), 0.25);
  EXPECT_EQ(sg::saturate(-0.5, 0.25), -0.25);
  EXPECT_EQ(sg::saturate(0.1, 0.25), 0.1);
  EXPECT_EQ(sg::saturate(0.25, 0.25), 0.25);
  const auto v = sg::saturate(sg::Vec3{1.0, -0.1, -9.0}, sg::SaturationLimits{{0.25, 0.25, 0.5}});
  EXPECT_EQ(v, (sg::Vec3{0.25, -0.1, -0.5}));
}

TEST(Saturate, PropertyNeverExceedsLimitAndIsIdempotent) {
  const auto failure = oracle::for_all<std::pair<double, double>>(
      7, 2000, [](oracle::Gen& g) { return std::pair{g.uniform(-10, 10), g.uniform(0, 2)}; },
      [](const std::pair<double, double>& in) -> std::string {
        const double s = sg::saturate(in.first, in.second);
        if (std::abs(s) > in.second) return "exceeds limit";
        if (sg::saturate(s, in.second) != s) return "not idempotent";
        if (std::abs(in.first) <= in.second && s != in.first) return "changed an in-range value";
        return {};
      });
  EXPECT_EQ(failure, "");
}
