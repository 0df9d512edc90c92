#include "forcemap/labelgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

namespace forcemap {

void ContactPoint::validate() const {
  if (!position.allFinite()) throw Error(ErrorKind::InvalidArgument, "contact position is not finite");
  if (!std::isfinite(force) || force < 0.0) {
    throw Error(ErrorKind::InvalidArgument,
                "contact force must be finite and >= 0 (got " + std::to_string(force) + ")");
  }
  if (!normal.allFinite() || std::abs(normal.norm() - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidArgument, "contact normal must be a unit vector");
  }
}

void KdeParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorKind::InvalidArgument, "KDE sigma must be positive");
  }
  if (!(truncation_sigmas > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "KDE truncation radius must be positive");
  }
}

void sort_contacts(std::vector<ContactPoint>& contacts) {
  auto key = [](const ContactPoint& c) {
    return std::tie(c.frame, c.body_a, c.body_b, c.position.x(), c.position.y(),
                    c.position.z(), c.force);
  };
  std::stable_sort(contacts.begin(), contacts.end(),
                   [&](const ContactPoint& a, const ContactPoint& b) { return key(a) < key(b); });
}

ForceMap kde_voxelize(const ContactFrame& frame, const GridSpec& spec, const KdeParams& params,
                      Diagnostics* diagnostics) {
  spec.validate();
  params.validate();
  ForceMap map(spec, frame.frame);
  const std::size_t n = frame.contacts.size();
  if (n == 0) return map;

  std::vector<ContactPoint> contacts = frame.contacts;
  for (const auto& c : contacts) c.validate();
  sort_contacts(contacts);

  const double h = spec.spacing;
  const double sigma = params.sigma;
  const double cutoff = params.truncation_sigmas * sigma;
  const double cutoff_sq = cutoff * cutoff;
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
  const double margin = params.margin();
  const Vec3 grid_lo = spec.origin;
  const Vec3 grid_hi = spec.upper_center();

  std::vector<double>& acc = map.values();
  for (const auto& c : contacts) {
    if ((c.position.array() < grid_lo.array() - margin).any() ||
        (c.position.array() > grid_hi.array() + margin).any()) {
      std::ostringstream msg;
      msg << "contact " << c.body_a << "/" << c.body_b << " at (" << c.position.x() << ", "
          << c.position.y() << ", " << c.position.z() << ") lies outside the grid influence margin";
      note(diagnostics, msg.str());
    }
    if (c.force == 0.0) continue;
    // Offsets are taken relative to the grid origin so that translating the
    // contacts and the grid together leaves every value unchanged.
    const Vec3 local = c.position - spec.origin;
    std::array<std::size_t, 3> lo{}, hi{};
    bool empty = false;
    for (int a = 0; a < 3; ++a) {
      const double first = std::ceil((local[a] - cutoff) / h);
      const double last = std::floor((local[a] + cutoff) / h);
      const double top = static_cast<double>(spec.dims[a] - 1);
      if (last < 0.0 || first > top) {
        empty = true;
        break;
      }
      lo[a] = static_cast<std::size_t>(std::max(first, 0.0));
      hi[a] = static_cast<std::size_t>(std::min(last, top));
    }
    if (empty) continue;
    for (std::size_t k = lo[2]; k <= hi[2]; ++k) {
      const double dz = h * static_cast<double>(k) - local.z();
      for (std::size_t j = lo[1]; j <= hi[1]; ++j) {
        const double dy = h * static_cast<double>(j) - local.y();
        for (std::size_t i = lo[0]; i <= hi[0]; ++i) {
          const double dx = h * static_cast<double>(i) - local.x();
          const double dist_sq = dx * dx + dy * dy + dz * dz;
          if (dist_sq > cutoff_sq) continue;
          acc[spec.linear(i, j, k)] += c.force * std::exp(-dist_sq * inv_two_sigma_sq);
        }
      }
    }
  }

  const double length = params.normalization == KdeNormalization::AsPrinted ? h : sigma;
  const double kernel_norm = 1.0 / std::pow(2.0 * std::numbers::pi, 1.5);
  const double prefactor = kernel_norm / (static_cast<double>(n) * length * length * length);
  for (double& v : acc) v *= prefactor;
  return map;
}

std::vector<ForceMap> temporal_average(std::span<const ForceMap> maps, int window) {
  if (window < 1) throw Error(ErrorKind::InvalidArgument, "temporal window must be >= 1");
  for (const auto& m : maps) {
    if (!(m.spec() == maps.front().spec())) {
      throw Error(ErrorKind::DimensionMismatch, "temporal_average needs maps on one grid spec");
    }
  }
  std::vector<ForceMap> out;
  out.reserve(maps.size());
  for (std::size_t t = 0; t < maps.size(); ++t) {
    const std::size_t first = t + 1 >= static_cast<std::size_t>(window) ? t + 1 - window : 0;
    ForceMap avg = maps[first];
    // Incremental mean: exact on runs of identical values.
    std::vector<double>& acc = avg.values();
    for (std::size_t s = first + 1; s <= t; ++s) {
      const double count = static_cast<double>(s - first + 1);
      const auto& v = maps[s].values();
      for (std::size_t n = 0; n < acc.size(); ++n) acc[n] += (v[n] - acc[n]) / count;
    }
    avg.set_frame(maps[t].frame());
    out.push_back(std::move(avg));
  }
  return out;
}

std::vector<ContactFrame> group_frames(std::vector<ContactPoint> contacts) {
  std::map<std::int64_t, std::vector<ContactPoint>> by_frame;
  for (auto& c : contacts) by_frame[c.frame].push_back(std::move(c));
  std::vector<ContactFrame> frames;
  frames.reserve(by_frame.size());
  for (auto& [index, list] : by_frame) frames.push_back({index, std::move(list)});
  return frames;
}

namespace {

Vec3 vec3_field(const nlohmann::json& obj, const char* key) {
  const auto& arr = obj.at(key);
  if (!arr.is_array() || arr.size() != 3) throw std::invalid_argument(std::string(key) + " must be [x,y,z]");
  return {arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()};
}

}  // namespace

std::vector<ContactFrame> read_contacts(std::istream& source) {
  std::vector<ContactPoint> contacts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ContactPoint c;
    try {
      const auto obj = nlohmann::json::parse(line);
      if (!obj.is_object()) throw std::invalid_argument("expected a JSON object");
      c.frame = obj.at("frame").get<std::int64_t>();
      c.body_a = obj.at("body_a").get<std::string>();
      c.body_b = obj.at("body_b").get<std::string>();
      c.position = vec3_field(obj, "position");
      c.force = obj.at("force").get<double>();
      c.normal = vec3_field(obj, "normal");
    } catch (const std::exception& e) {
      throw Error(ErrorKind::Parse,
                  "contact log line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      c.validate();
    } catch (const Error& e) {
      throw Error(ErrorKind::InvalidArgument,
                  "contact log line " + std::to_string(line_no) + ": " + e.what());
    }
    contacts.push_back(std::move(c));
  }
  return group_frames(std::move(contacts));
}

void write_contacts(std::span<const ContactFrame> frames, std::ostream& sink) {
  for (const auto& f : frames) {
    for (const auto& c : f.contacts) {
      nlohmann::ordered_json obj;
      obj["frame"] = c.frame;
      obj["body_a"] = c.body_a;
      obj["body_b"] = c.body_b;
      obj["position"] = {c.position.x(), c.position.y(), c.position.z()};
      obj["force"] = c.force;
      obj["normal"] = {c.normal.x(), c.normal.y(), c.normal.z()};
      sink << obj.dump() << '\n';
    }
  }
  if (!sink) throw Error(ErrorKind::Io, "failed writing contact log");
}

std::vector<ContactFrame> read_contacts_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_contacts(in);
}

void write_contacts_file(std::span<const ContactFrame> frames, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  write_contacts(frames, out);
}

}  // namespace forcemap
