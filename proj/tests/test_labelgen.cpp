#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "forcemap/labelgen.hpp"
#include "oracles.hpp"

using namespace forcemap;

namespace {

GridSpec centered_grid(std::uint32_t n) {
  GridSpec spec;
  spec.dims = {n, n, n};
  spec.origin = Vec3::Constant(-0.5 * (n - 1) * spec.spacing);
  return spec;
}

ContactPoint contact(const Vec3& p, double f) {
  ContactPoint c;
  c.position = p;
  c.force = f;
  c.body_a = "a";
  c.body_b = "b";
  return c;
}

ContactFrame random_frame(std::mt19937_64& rng, double extent) {
  std::uniform_real_distribution<double> pos(-extent, extent);
  std::uniform_real_distribution<double> force(0.1, 5.0);
  std::uniform_int_distribution<int> count(1, 8);
  ContactFrame frame;
  const int n = count(rng);
  for (int k = 0; k < n; ++k) frame.contacts.push_back(contact({pos(rng), pos(rng), pos(rng)}, force(rng)));
  return frame;
}

}  // namespace

TEST_SUITE("labelgen") {

TEST_CASE("empty frame gives the zero map") {
  const ForceMap map = kde_voxelize(ContactFrame{}, centered_grid(8), KdeParams{});
  for (double v : map.values()) CHECK(v == 0.0);
}

TEST_CASE("single unit contact on a voxel center") {
  const GridSpec spec = centered_grid(33);
  const Vec3 at = spec.center(16, 16, 16);
  ContactFrame frame{0, {contact(at, 1.0)}};
  const ForceMap map = kde_voxelize(frame, spec, KdeParams{});
  const double h = spec.spacing;
  const double expected = std::pow(2.0 * std::numbers::pi, -1.5) / (h * h * h);
  CHECK(map.at(16, 16, 16) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(map.at(16, 16, 16) ==
        doctest::Approx(oracle::kde_at(at, frame.contacts, h, 0.012)).epsilon(1e-12));
  CHECK(map.frame() == 0);
}

TEST_CASE("interior blob mass matches the gaussian integral") {
  const GridSpec spec = centered_grid(40);
  const double sigma = 0.012, h = spec.spacing;
  ContactFrame frame{0, {contact({0.001, -0.002, 0.0015}, 2.0), contact({-0.01, 0.004, 0.0}, 1.0)}};
  const ForceMap map = kde_voxelize(frame, spec, KdeParams{});
  double mass = 0.0;
  for (double v : map.values()) mass += v * h * h * h;
  const double analytic = std::pow(sigma, 3) * 3.0 / (2.0 * h * h * h);
  CHECK(std::abs(mass - analytic) / analytic <= 0.01);
}

TEST_CASE("textbook normalization differs by (h / sigma)^3") {
  const GridSpec spec = centered_grid(17);
  ContactFrame frame{0, {contact(spec.center(8, 8, 8), 1.5)}};
  KdeParams textbook;
  textbook.normalization = KdeNormalization::Textbook;
  const double ratio = std::pow(spec.spacing / 0.012, 3);
  CHECK(kde_voxelize(frame, spec, textbook).at(8, 8, 8) ==
        doctest::Approx(kde_voxelize(frame, spec, KdeParams{}).at(8, 8, 8) * ratio).epsilon(1e-12));
}

TEST_CASE("matches direct evaluation inside the truncation radius") {
  std::mt19937_64 rng(17);
  const GridSpec spec = centered_grid(20);
  const ContactFrame frame = random_frame(rng, 0.03);
  const ForceMap map = kde_voxelize(frame, spec, KdeParams{});
  // with no truncation at all the kernels agree everywhere
  KdeParams untruncated;
  untruncated.truncation_sigmas = 1e3;
  const ForceMap full = kde_voxelize(frame, spec, untruncated);
  for (std::uint32_t n : {0u, 37u, 1234u, 4000u, 7999u}) {
    const auto [i, j, k] = spec.unlinear(n);
    const double direct = oracle::kde_at(spec.center(i, j, k), frame.contacts, spec.spacing, 0.012);
    CHECK(full.values()[n] == doctest::Approx(direct).epsilon(1e-12));
    CHECK(map.values()[n] <= full.values()[n] + 1e-12 * direct);
  }
}

TEST_CASE("weighted additivity, homogeneity, translation, non-negativity") {
  std::mt19937_64 rng(99);
  const GridSpec spec = centered_grid(24);
  const KdeParams params;
  for (int trial = 0; trial < 20; ++trial) {
    const ContactFrame a = random_frame(rng, 0.03);
    const ContactFrame b = random_frame(rng, 0.03);
    ContactFrame both = a;
    both.contacts.insert(both.contacts.end(), b.contacts.begin(), b.contacts.end());
    const ForceMap ma = kde_voxelize(a, spec, params);
    const ForceMap mb = kde_voxelize(b, spec, params);
    const ForceMap mab = kde_voxelize(both, spec, params);
    const double na = static_cast<double>(a.contacts.size());
    const double nb = static_cast<double>(b.contacts.size());
    const double scale = mab.max_value();
    const double peak_a = ma.max_value();
    for (std::size_t n = 0; n < mab.values().size(); ++n) {
      const double expected = (na * ma.values()[n] + nb * mb.values()[n]) / (na + nb);
      REQUIRE(std::abs(mab.values()[n] - expected) <= 1e-12 * scale);
      REQUIRE(mab.values()[n] >= 0.0);
    }

    ContactFrame scaled = a;
    for (auto& c : scaled.contacts) c.force *= 2.5;
    const ForceMap ms = kde_voxelize(scaled, spec, params);
    for (std::size_t n = 0; n < ms.values().size(); ++n) {
      REQUIRE(std::abs(ms.values()[n] - 2.5 * ma.values()[n]) <= 1e-12 * 2.5 * peak_a);
    }

    ContactFrame shifted = a;
    for (auto& c : shifted.contacts) c.position += spec.spacing * Vec3(2, -1, 3);
    const ForceMap mt = kde_voxelize(shifted, spec, params);
    for (std::uint32_t k = 0; k + 3 < 24; ++k)
      for (std::uint32_t j = 1; j < 24; ++j)
        for (std::uint32_t i = 0; i + 2 < 24; ++i) {
          REQUIRE(std::abs(mt.at(i + 2, j - 1, k + 3) - ma.at(i, j, k)) <= 1e-12 * peak_a);
        }
  }
}

TEST_CASE("contact order does not change the bits") {
  std::mt19937_64 rng(5);
  const GridSpec spec = centered_grid(12);
  ContactFrame frame = random_frame(rng, 0.02);
  const ForceMap first = kde_voxelize(frame, spec, KdeParams{});
  std::reverse(frame.contacts.begin(), frame.contacts.end());
  CHECK(kde_voxelize(frame, spec, KdeParams{}) == first);
}

TEST_CASE("contacts far outside the grid raise a diagnostic") {
  Diagnostics diag;
  ContactFrame frame{0, {contact({1.0, 0.0, 0.0}, 1.0)}};
  const ForceMap map = kde_voxelize(frame, centered_grid(8), KdeParams{}, &diag);
  CHECK(diag.size() == 1);
  CHECK(map.max_value() == 0.0);
}

TEST_CASE("invalid contacts are rejected") {
  ContactFrame frame{0, {contact(Vec3::Zero(), -1.0)}};
  CHECK_THROWS_AS(kde_voxelize(frame, centered_grid(8), KdeParams{}), Error);
}

TEST_CASE("temporal average") {
  const GridSpec spec = centered_grid(3);
  auto constant = [&](double v, std::int64_t frame) {
    ForceMap m(spec, frame);
    for (auto& x : m.values()) x = v;
    return m;
  };

  SUBCASE("identical constant maps are unchanged") {
    const std::vector<ForceMap> maps(6, constant(0.3, 0));
    for (int window : {1, 2, 5, 9}) {
      for (const auto& m : temporal_average(maps, window)) CHECK(m == maps.front());
    }
  }
  SUBCASE("window 1 is the identity") {
    std::vector<ForceMap> maps{constant(1.0, 0), constant(2.0, 1), constant(7.0, 2)};
    CHECK(temporal_average(maps, 1) == maps);
  }
  SUBCASE("window 2 averages consecutive frames") {
    std::vector<ForceMap> maps{constant(1.0, 0), constant(4.0, 1)};
    const auto out = temporal_average(maps, 2);
    CHECK(out[0].values()[0] == 1.0);
    CHECK(out[1].values()[0] == 2.5);
    CHECK(out[1].frame() == 1);
  }
  SUBCASE("mixed specs are rejected") {
    GridSpec other = spec;
    other.spacing *= 2.0;
    std::vector<ForceMap> maps{ForceMap(spec), ForceMap(other)};
    CHECK_THROWS_AS(temporal_average(maps, 2), Error);
  }
  SUBCASE("window must be positive") {
    std::vector<ForceMap> maps{ForceMap(spec)};
    CHECK_THROWS_AS(temporal_average(maps, 0), Error);
  }
}

TEST_CASE("contact log") {
  SUBCASE("empty input is an empty list") {
    std::istringstream in("");
    CHECK(read_contacts(in).empty());
  }
  SUBCASE("one valid line") {
    std::istringstream in(
        R"({"frame":3,"body_a":"floor","body_b":"box","position":[0.1,0.2,0.3],"force":1.5,"normal":[0,0,1]})"
        "\n");
    const auto frames = read_contacts(in);
    REQUIRE(frames.size() == 1);
    REQUIRE(frames[0].contacts.size() == 1);
    const auto& c = frames[0].contacts[0];
    CHECK(frames[0].frame == 3);
    CHECK(c.frame == 3);
    CHECK(c.body_a == "floor");
    CHECK(c.body_b == "box");
    CHECK(c.position == Vec3(0.1, 0.2, 0.3));
    CHECK(c.force == 1.5);
    CHECK(c.normal == Vec3::UnitZ());
  }
  SUBCASE("negative force names the line") {
    std::istringstream in(
        R"({"frame":0,"body_a":"a","body_b":"b","position":[0,0,0],"force":1,"normal":[0,0,1]})"
        "\n"
        R"({"frame":0,"body_a":"a","body_b":"b","position":[0,0,0],"force":-1,"normal":[0,0,1]})"
        "\n");
    try {
      read_contacts(in);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("malformed json names the line") {
    std::istringstream in("\n{not json\n");
    try {
      read_contacts(in);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Parse);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("write then read reproduces the frames") {
    std::mt19937_64 rng(4);
    std::vector<ContactFrame> frames{random_frame(rng, 0.05), random_frame(rng, 0.05)};
    frames[1].frame = 4;
    for (auto& f : frames)
      for (auto& c : f.contacts) c.frame = f.frame;
    std::stringstream io;
    write_contacts(frames, io);
    const auto back = read_contacts(io);
    REQUIRE(back.size() == 2);
    for (std::size_t n = 0; n < 2; ++n) CHECK(back[n].contacts == frames[n].contacts);
  }
}

TEST_CASE("frames are grouped in ascending order") {
  std::vector<ContactPoint> contacts(3, contact(Vec3::Zero(), 1.0));
  contacts[0].frame = 5;
  contacts[1].frame = 2;
  contacts[2].frame = 5;
  const auto frames = group_frames(contacts);
  REQUIRE(frames.size() == 2);
  CHECK(frames[0].frame == 2);
  CHECK(frames[1].contacts.size() == 2);
}

}  // TEST_SUITE
