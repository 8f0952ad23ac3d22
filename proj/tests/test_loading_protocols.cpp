#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include <icann/loading_protocols.hh>
#include <icann/property_checks.hh>

using namespace icann;
using T3 = SymTensor3<double>;

namespace {

double at_time(const LoadPath& p, double t) {
  const auto it = std::find_if(p.time.begin(), p.time.end(), [&](double x) { return std::abs(x - t) < 1e-9; });
  if (it == p.time.end())
    throw std::out_of_range("no sample at t = " + std::to_string(t));
  return p.c11[static_cast<std::size_t>(it - p.time.begin())];
}

} // namespace

TEST(CoaxialCauchyGreen, UnitDeterminant) {
  for (auto p : {Protocol::uniaxial, Protocol::equibiaxial, Protocol::pure_shear})
    for (double c11 : {0.3, 0.6, 1.0, 1.5, 2.1, 9.0})
      EXPECT_NEAR(det(coaxial_cauchy_green(p, c11)), 1.0, 1e-14);
  const T3 ps = coaxial_cauchy_green(Protocol::pure_shear, 1.2);
  EXPECT_DOUBLE_EQ(ps.diag(1), 1.0);
  const T3 eb = coaxial_cauchy_green(Protocol::equibiaxial, 1.8);
  EXPECT_DOUBLE_EQ(eb.diag(1), 1.8);
}

TEST(ProtocolNames, RoundTrip) {
  for (auto p : {Protocol::uniaxial, Protocol::equibiaxial, Protocol::pure_shear})
    EXPECT_EQ(parse_protocol(to_string(p)), p);
  EXPECT_THROW(parse_protocol("simple_shear"), ConfigError);
}

TEST(RelaxationPath, UniaxialTension) {
  const auto p = build_relaxation_path(Protocol::uniaxial, 1.5, 0.5, 10.0, 0.01);
  EXPECT_EQ(p.size(), 1051u);
  EXPECT_DOUBLE_EQ(p.c11.front(), 1.0);
  EXPECT_NEAR(at_time(p, 0.25), 1.25, 1e-12);
  EXPECT_NEAR(at_time(p, 0.5), 1.5, 1e-12);
  EXPECT_DOUBLE_EQ(p.c11.back(), 1.5);
  EXPECT_NEAR(p.time.back(), 10.5, 1e-12);
  EXPECT_NO_THROW(p.validate());
}

TEST(RelaxationPath, Compression) {
  const auto p = build_relaxation_path(Protocol::uniaxial, 0.6, 0.5, 10.0, 0.01);
  EXPECT_DOUBLE_EQ(p.c11.back(), 0.6);
  EXPECT_TRUE(std::is_sorted(p.c11.rbegin(), p.c11.rend()));
}

TEST(RelaxationPath, IdentityIsStressFree) {
  const auto p = build_relaxation_path(Protocol::uniaxial, 1.0, 0.5, 2.0, 0.01);
  for (double c : p.c11)
    EXPECT_EQ(c, 1.0);
  for (double s : rollout_s11(ReferenceSolid(ReferenceModel{}), p))
    EXPECT_NEAR(s, 0.0, 1e-14);
}

TEST(RelaxationPath, RejectsBadInput) {
  EXPECT_THROW(build_relaxation_path(Protocol::uniaxial, 0.0, 0.5, 1.0, 0.01), DomainError);
  EXPECT_THROW(build_relaxation_path(Protocol::uniaxial, 1.5, 0.0, 1.0, 0.01), DomainError);
  EXPECT_THROW(build_relaxation_path(Protocol::uniaxial, 1.5, 0.5, 1.0, 0.0), DomainError);
}

TEST(CyclicPath, ThreeSegmentSchedule) {
  const ArtificialProtocol proto;
  const auto p = build_cyclic_path(Protocol::uniaxial, proto.cyclic, 0.01);
  EXPECT_EQ(p.size(), 161u);
  EXPECT_DOUBLE_EQ(p.c11.front(), 1.0);
  EXPECT_NEAR(at_time(p, 0.2), 1.1, 1e-12);
  EXPECT_NEAR(at_time(p, 0.4), 1.2, 1e-12);
  EXPECT_NEAR(at_time(p, 0.8), 1.65, 1e-12);
  EXPECT_NEAR(at_time(p, 1.2), 2.1, 1e-12);
  EXPECT_NEAR(at_time(p, 1.4), 1.3, 1e-12);
  EXPECT_NEAR(p.c11.back(), 0.5, 1e-12);
  EXPECT_NEAR(p.time.back(), 1.6, 1e-12);
}

TEST(CyclicPath, SingleSegmentToOne) {
  const std::vector<CyclicSegment> seg{{1.0, 1.0}};
  const auto p = build_cyclic_path(Protocol::uniaxial, seg, 0.1);
  for (double c : p.c11)
    EXPECT_DOUBLE_EQ(c, 1.0);
}

TEST(CyclicPath, RejectsUnorderedSegments) {
  const std::vector<CyclicSegment> seg{{1.0, 1.5}, {0.5, 1.0}};
  EXPECT_THROW(build_cyclic_path(Protocol::uniaxial, seg, 0.1), DomainError);
  EXPECT_THROW(build_cyclic_path(Protocol::uniaxial, {}, 0.1), DomainError);
}

TEST(StretchRatePath, SquaredStretch) {
  const double rate = 0.05;
  const auto p      = build_stretch_rate_path(Protocol::uniaxial, rate, 9.0, 0.1, false);
  EXPECT_NEAR(p.time.back(), 40.0, 1e-9);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double f = 1.0 + rate * p.time[k];
    EXPECT_NEAR(p.c11[k], f * f, 1e-12);
  }
}

TEST(StretchRatePath, LoadUnload) {
  const auto p = build_stretch_rate_path(Protocol::uniaxial, 0.5, 4.0, 0.01, true);
  EXPECT_NEAR(p.time.back(), 4.0, 1e-9);
  EXPECT_NEAR(at_time(p, 2.0), 4.0, 1e-12);
  EXPECT_NEAR(at_time(p, 3.0), 2.25, 1e-12);
  EXPECT_NEAR(p.c11.back(), 1.0, 1e-12);
}

TEST(LoadPath, Validation) {
  LoadPath p{Protocol::uniaxial, {0.0, 0.1, 0.1}, {1.0, 1.1, 1.2}};
  EXPECT_THROW(p.validate(), DomainError);
  p.time = {0.0, 0.1, 0.2};
  p.c11  = {1.0, -1.0, 1.2};
  EXPECT_THROW(p.validate(), DomainError);
  p.c11 = {1.0, NAN, 1.2};
  EXPECT_THROW(p.validate(), DomainError);
}

TEST(ReferenceModel, Validation) {
  ReferenceModel m;
  m.tau = 0.0;
  EXPECT_THROW(m.validate(), DomainError);
}

TEST(ReferenceModel, RelaxesAfterRamp) {
  const auto data = generate_artificial_dataset(ReferenceModel{});
  const auto& d   = data[0];
  const auto peak = static_cast<std::size_t>(std::round(0.5 / 0.01));
  EXPECT_GT(d.stress[peak], d.stress.back());
  EXPECT_GT(d.stress.back(), 0.0);
  EXPECT_EQ(std::max_element(d.stress.begin(), d.stress.end()) - d.stress.begin(), static_cast<long>(peak));
}

TEST(ReferenceModel, SmallStrainModulus) {
  const ReferenceModel m;
  const ReferenceSolid solid(m);
  auto state       = MaterialState<double>::virgin(1);
  state            = solid_step(solid, state, T3::identity(), 0.0, 0).second;
  const double c11 = 1.0 + 2e-4;
  const auto out   = solid_step(solid, state, coaxial_cauchy_green(Protocol::uniaxial, c11), 1e-6, 1).first;
  // Incompressible small strain: S11 = 3 μ E11 with E11 = (C11 - 1) / 2.
  const double want = 3.0 * m.mu * (c11 - 1.0) / 2.0;
  EXPECT_NEAR(out.S.diag(0) / want, 1.0, 0.1);
}

TEST(ReferenceModel, DissipationNonNegative) {
  const auto data = generate_artificial_dataset(ReferenceModel{});
  const ReferenceSolid solid(ReferenceModel{});
  for (const auto& d : data)
    rollout(solid, d.path, [&](std::size_t k, const auto& o) {
      EXPECT_GE(o.branches[0].dissipation, -1e-12) << d.name << " sample " << k;
    });
}

TEST(ReferenceModel, VolumeEvolvesOffIncompressibleStates) {
  const ReferenceModel m;
  const T3 u      = T3::diagonal(1.05, 1.0, 1.0);
  const T3 next   = evolve_state(m, u, T3::identity(), 0.1);
  const double d0 = checks::det_ci(u);
  EXPECT_GT(std::abs(checks::det_ci(next) - d0), 1e-6);
}

TEST(ArtificialData, FiveSeries) {
  const auto data = generate_artificial_dataset(ReferenceModel{});
  ASSERT_EQ(data.size(), 5u);
  const std::array<const char*, 5> names{"uniaxial_tension", "uniaxial_compression", "equibiaxial_tension",
                                         "pure_shear", "uniaxial_cyclic"};
  const std::array<double, 4> c11_max{1.5, 0.6, 1.8, 1.2};
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(data[k].name, names[k]);
    EXPECT_NO_THROW(data[k].validate());
    if (k < 4) {
      EXPECT_DOUBLE_EQ(data[k].c11_max, c11_max[k]);
      EXPECT_DOUBLE_EQ(data[k].path.c11.back(), c11_max[k]);
    }
    for (std::size_t i = 0; i < data[k].path.size(); ++i)
      ASSERT_NEAR(det(data[k].path.C(i)), 1.0, 1e-14);
  }
  EXPECT_EQ(data[2].path.protocol, Protocol::equibiaxial);
  EXPECT_EQ(data[3].path.protocol, Protocol::pure_shear);
}

TEST(ArtificialData, Deterministic) {
  const auto a = generate_artificial_dataset(ReferenceModel{});
  const auto b = generate_artificial_dataset(ReferenceModel{});
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].stress, b[k].stress);
    EXPECT_EQ(a[k].path.c11, b[k].path.c11);
  }
}

TEST(ArtificialData, ConfigurableSampling) {
  ArtificialProtocol p;
  p.dt     = 0.05;
  p.hold_s = 2.0;
  const auto data = generate_artificial_dataset(ReferenceModel{}, p);
  EXPECT_EQ(data[0].path.size(), 51u);
}
