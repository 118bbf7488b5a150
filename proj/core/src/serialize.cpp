#include "halfmoll/serialize.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>

#include "halfmoll/error.hpp"

namespace halfmoll {
namespace {

using nlohmann::json;

constexpr std::array<char, 8> kMagic{'H', 'M', 'F', 'I', 'E', 'L', 'D', '1'};

json axis_json(const Axis& a) { return json{{"lo", a.lo}, {"step", a.step}, {"count", a.count}}; }

Axis axis_from(const json& j) {
  return Axis{j.at("lo").get<double>(), j.at("step").get<double>(), j.at("count").get<std::size_t>()};
}

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  std::array<char, sizeof(T)> bytes{};
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<char, sizeof(T)> bytes{};
  in.read(bytes.data(), sizeof(T));
  require(static_cast<bool>(in), ErrorKind::io, "truncated field file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

json header(const SampledField& f) {
  json j;
  j["format"] = "halfmoll-sampled-field";
  j["version"] = 1;
  j["support"] = f.support() == Support::bulk ? "bulk" : "boundary";
  j["dimension"] = f.grid().dimension();
  j["spacing"] = f.grid().spacing();
  json grid_axes = json::array();
  json extents = json::array();
  for (const Axis& a : f.grid().axes()) {
    grid_axes.push_back(axis_json(a));
    extents.push_back(json::array({a.lo, a.hi()}));
  }
  j["grid_axes"] = grid_axes;
  j["extents"] = extents;
  j["time"] = f.time() ? json{{"lo", f.time()->lo}, {"step", f.time()->step}, {"count", f.time()->count},
                              {"horizon", f.time()->hi()}}
                       : json(nullptr);
  j["value_count"] = f.values().size();
  j["byte_order"] = "little";
  j["value_type"] = "float64";
  return j;
}

}  // namespace

std::string field_header_json(const SampledField& field) { return header(field).dump(); }

void write_binary(const SampledField& field, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!(static_cast<bool>(out))) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  const std::string text = field_header_json(field);
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double v : field.values()) put_le<double>(out, v);
  if (!(static_cast<bool>(out))) fail(ErrorKind::io, "write failed for " + path.string());
}

SampledField read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!(static_cast<bool>(in))) fail(ErrorKind::io, "cannot open " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!(static_cast<bool>(in) && magic == kMagic)) fail(ErrorKind::io, path.string() + " is not a sampled-field file");
  const auto length = get_le<std::uint64_t>(in);
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!(static_cast<bool>(in))) fail(ErrorKind::io, "truncated header in " + path.string());
  const json j = json::parse(text);
  std::vector<Axis> axes;
  for (const json& a : j.at("grid_axes")) axes.push_back(axis_from(a));
  const StripGrid grid = StripGrid::box(std::move(axes));
  std::optional<Axis> time;
  if (!j.at("time").is_null()) time = axis_from(j.at("time"));
  std::vector<double> values(j.at("value_count").get<std::size_t>());
  for (double& v : values) v = get_le<double>(in);
  if (j.at("support") == "boundary") return SampledField(BoundaryGrid(grid, time), std::move(values));
  return SampledField(grid, time, std::move(values));
}

void write_csv(const SampledField& field, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!(static_cast<bool>(out))) fail(ErrorKind::io, "cannot open " + path.string() + " for writing");
  const bool has_time = field.time().has_value();
  const std::size_t spatial = field.spatial_dims();
  if (has_time) out << "t,";
  for (std::size_t a = 0; a < spatial; ++a) out << 'x' << a << ',';
  out << "value\n";
  out << std::setprecision(17);
  const std::size_t ns = field.spatial_count();
  const auto values = field.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (has_time) out << field.time()->node(i / ns) << ',';
    for (double c : field.spatial_node(i % ns)) out << c << ',';
    out << values[i] << '\n';
  }
}

}  // namespace halfmoll
