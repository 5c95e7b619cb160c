#include "odefit/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "odefit/errors.hpp"
#include "odefit/number_format.hpp"

namespace odefit {
namespace {

using nlohmann::json;

json params_json(const CSParams& p) {
  json j = json::object();
  const Vector v = p.to_vector();
  for (Index k = 0; k < CSParams::size; ++k) j[CSParams::names[static_cast<std::size_t>(k)]] = v(k);
  return j;
}

CSParams params_from(const json& j) {
  Vector v(CSParams::size);
  for (Index k = 0; k < CSParams::size; ++k) {
    v(k) = j.at(CSParams::names[static_cast<std::size_t>(k)]).get<double>();
  }
  return CSParams::from_vector(v);
}

json vector_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

double parse_double(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error("dataset: cannot parse number '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

bool Dataset::operator==(const Dataset& o) const {
  if (num_particles != o.num_particles || !(grid == o.grid) || !(truth == o.truth) ||
      !(init == o.init) || seed != o.seed || noise_std != o.noise_std) {
    return false;
  }
  if (x0.size() != o.x0.size() || x0 != o.x0) return false;
  if (targets.rows() != o.targets.rows() || targets.cols() != o.targets.cols() ||
      targets != o.targets) {
    return false;
  }
  if (test_x0s.size() != o.test_x0s.size()) return false;
  for (std::size_t i = 0; i < test_x0s.size(); ++i) {
    if (test_x0s[i].size() != o.test_x0s[i].size() || test_x0s[i] != o.test_x0s[i]) return false;
  }
  return true;
}

void write_dataset(std::ostream& out, const Dataset& d) {
  json header;
  header["format"] = "odefit-dataset";
  header["version"] = 1;
  header["model"] = "cucker_smale";
  header["num_particles"] = d.num_particles;
  header["state_dim"] = 4 * d.num_particles;
  header["grid"] = {{"t0", d.grid.t0}, {"h", d.grid.h}, {"num_intervals", d.grid.num_intervals}};
  header["truth"] = params_json(d.truth);
  header["init"] = params_json(d.init);
  header["seed"] = d.seed;
  header["noise_std"] = d.noise_std;
  header["x0"] = vector_json(d.x0);
  json tests = json::array();
  for (const auto& x : d.test_x0s) tests.push_back(vector_json(x));
  header["test_x0"] = std::move(tests);
  out << header.dump() << '\n';

  out << 't';
  for (Index c = 0; c < d.targets.cols(); ++c) out << ",s" << c;
  out << '\n';
  for (Index i = 0; i < d.targets.rows(); ++i) {
    out << format_double(d.grid.time(i));
    for (Index c = 0; c < d.targets.cols(); ++c) out << ',' << format_double(d.targets(i, c));
    out << '\n';
  }
}

Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("dataset: missing header");
  Dataset d;
  try {
    const json header = json::parse(line);
    if (header.value("format", "") != "odefit-dataset") throw Error("dataset: unknown format");
    d.num_particles = header.at("num_particles").get<Index>();
    const auto& g = header.at("grid");
    d.grid = TimeGrid{g.at("t0").get<double>(), g.at("h").get<double>(),
                      g.at("num_intervals").get<Index>()};
    d.truth = params_from(header.at("truth"));
    d.init = params_from(header.at("init"));
    d.seed = header.at("seed").get<std::uint64_t>();
    d.noise_std = header.at("noise_std").get<double>();
    d.x0 = vector_from(header.at("x0"));
    for (const auto& t : header.at("test_x0")) d.test_x0s.push_back(vector_from(t));
  } catch (const json::exception& e) {
    throw Error(std::string("dataset: bad header: ") + e.what());
  }
  d.grid.validate();
  const Index n = 4 * d.num_particles;
  if (d.x0.size() != n) throw Error("dataset: x0 does not match the particle count");

  if (!std::getline(in, line)) throw Error("dataset: missing column header");
  d.targets.resize(d.grid.num_samples(), n);
  for (Index i = 0; i < d.grid.num_samples(); ++i) {
    if (!std::getline(in, line)) throw Error("dataset: expected " +
                                             std::to_string(d.grid.num_samples()) + " rows");
    std::string_view rest(line);
    for (Index c = -1; c < n; ++c) {
      const auto comma = rest.find(',');
      const std::string_view cell = rest.substr(0, comma);
      const double value = parse_double(cell);
      if (c >= 0) d.targets(i, c) = value;
      if (comma == std::string_view::npos) {
        if (c != n - 1) throw Error("dataset: row " + std::to_string(i) + " is too short");
        rest = {};
      } else {
        if (c == n - 1) throw Error("dataset: row " + std::to_string(i) + " is too long");
        rest.remove_prefix(comma + 1);
      }
    }
  }
  return d;
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_dataset(out, data);
  if (!out) throw Error("failed writing " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return read_dataset(in);
}

}  // namespace odefit
