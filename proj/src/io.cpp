#include "convexsdf/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "convexsdf/transforms.hpp"

namespace convexsdf {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const void* data, std::size_t n) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool is_pgm(const std::string& path) { return ends_with(path, ".pgm") || ends_with(path, ".PGM"); }

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& s) {
  if (s.empty()) throw std::invalid_argument("config: empty value for '" + key + "'");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw std::invalid_argument("config: '" + key + "' is not a number: " + s);
  return v;
}

long long parse_int(const std::string& key, const std::string& s) {
  if (s.empty()) throw std::invalid_argument("config: empty value for '" + key + "'");
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) throw std::invalid_argument("config: '" + key + "' is not an integer: " + s);
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw std::invalid_argument("config: '" + key + "' must be true or false, got " + s);
}

void check_expected(const GridShape& got, const std::optional<GridShape>& expect, const std::string& path) {
  if (expect && !(got == *expect)) {
    throw std::runtime_error("dim mismatch in '" + path + "': file has " + format_dims(got) + ", expected " +
                             format_dims(*expect));
  }
}

ScalarField decode(const RawVolume& vol) {
  const GridShape shape = vol.header.shape();
  ScalarField f(shape);
  if (vol.header.dtype == DType::U8) {
    for (Index i = 0; i < shape.size(); ++i) f[i] = vol.payload[static_cast<std::size_t>(i)];
    return f;
  }
  for (Index i = 0; i < shape.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(vol.payload[static_cast<std::size_t>(8 * i + b)]) << (8 * b);
    }
    f[i] = std::bit_cast<double>(bits);
  }
  return f;
}

std::string coord_string(const GridShape& shape, Index i) {
  const auto c = shape.coord(i);
  std::string s = "(";
  for (int a = 0; a < shape.ndim(); ++a) {
    if (a) s += ", ";
    s += std::to_string(c[static_cast<std::size_t>(a)]);
  }
  return s + ")";
}

}  // namespace

std::size_t VolumeHeader::payload_bytes() const {
  std::size_t n = dtype == DType::U8 ? 1 : 8;
  for (Index d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

std::string VolumeHeader::render() const {
  std::string dim_text;
  for (std::size_t a = 0; a < dims.size(); ++a) {
    if (a) dim_text += "x";
    dim_text += std::to_string(dims[a]);
  }
  return "dims=" + dim_text + "\ndtype=" + (dtype == DType::U8 ? "u8" : "f64") + "\nendian=little\n";
}

VolumeHeader VolumeHeader::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::map<std::string, std::string> kv;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("malformed header line " + std::to_string(lineno) + ": '" + line + "'");
    }
    const std::string key = line.substr(0, eq);
    if (key != "dims" && key != "dtype" && key != "endian") {
      throw std::runtime_error("malformed header: unknown key '" + key + "'");
    }
    if (!kv.emplace(key, line.substr(eq + 1)).second) {
      throw std::runtime_error("malformed header: duplicate key '" + key + "'");
    }
  }
  if (!kv.count("dims") || !kv.count("dtype")) throw std::runtime_error("malformed header: missing dims or dtype");
  if (kv.count("endian") && kv["endian"] != "little") {
    throw std::runtime_error("malformed header: unsupported byte order '" + kv["endian"] + "'");
  }
  VolumeHeader h;
  try {
    const GridShape shape = parse_dims(kv["dims"]);
    h.dims.assign(shape.dims().begin(), shape.dims().end());
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("malformed header: ") + e.what());
  }
  if (kv["dtype"] == "u8") {
    h.dtype = DType::U8;
  } else if (kv["dtype"] == "f64") {
    h.dtype = DType::F64;
  } else {
    throw std::runtime_error("malformed header: unknown dtype '" + kv["dtype"] + "'");
  }
  return h;
}

std::string header_path(const std::string& path) { return path + ".hdr"; }

RawVolume read_raw(const std::string& path, const std::optional<GridShape>& expect) {
  const auto hdr_bytes = read_file(header_path(path));
  RawVolume vol;
  vol.header = VolumeHeader::parse(std::string(hdr_bytes.begin(), hdr_bytes.end()));
  check_expected(vol.header.shape(), expect, path);
  vol.payload = read_file(path);
  if (vol.payload.size() != vol.header.payload_bytes()) {
    throw std::runtime_error("truncated payload in '" + path + "': expected " +
                             std::to_string(vol.header.payload_bytes()) + " bytes, got " +
                             std::to_string(vol.payload.size()));
  }
  return vol;
}

void write_raw(const std::string& path, const RawVolume& vol) {
  if (vol.payload.size() != vol.header.payload_bytes()) {
    throw std::invalid_argument("write_raw: payload length does not match the header");
  }
  const std::string hdr = vol.header.render();
  write_file(path, vol.payload.data(), vol.payload.size());
  write_file(header_path(path), hdr.data(), hdr.size());
}

GridShape parse_dims(const std::string& text) {
  std::vector<Index> dims;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto x = text.find('x', pos);
    const std::string part = text.substr(pos, x == std::string::npos ? std::string::npos : x - pos);
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos || part.size() > 12) {
      throw std::invalid_argument("invalid dims '" + text + "'");
    }
    dims.push_back(static_cast<Index>(std::stoll(part)));
    if (x == std::string::npos) break;
    pos = x + 1;
  }
  return GridShape(std::span<const Index>(dims));
}

std::string format_dims(const GridShape& shape) {
  std::string s;
  for (int a = 0; a < shape.ndim(); ++a) {
    if (a) s += "x";
    s += std::to_string(shape.dim(a));
  }
  return s;
}

ScalarField read_pgm(const std::string& path) {
  const auto bytes = read_file(path);
  std::size_t pos = 0;
  const auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  const auto read_uint = [&](const char* what) {
    skip_space();
    long long v = 0;
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(bytes[pos]) && pos - start < 9) v = 10 * v + (bytes[pos++] - '0');
    if (pos == start) throw std::runtime_error("malformed greymap header in '" + path + "': bad " + what);
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw std::runtime_error("malformed greymap header in '" + path + "': missing P5 magic");
  }
  pos = 2;
  const long long width = read_uint("width");
  const long long height = read_uint("height");
  const long long maxval = read_uint("maxval");
  if (maxval < 1 || maxval > 65535) throw std::runtime_error("malformed greymap header in '" + path + "': maxval");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw std::runtime_error("malformed greymap header in '" + path + "'");
  }
  ++pos;
  const GridShape shape{static_cast<Index>(height), static_cast<Index>(width)};
  const std::size_t bpp = maxval < 256 ? 1 : 2;
  const std::size_t need = static_cast<std::size_t>(shape.size()) * bpp;
  if (bytes.size() - pos != need) {
    throw std::runtime_error("truncated payload in '" + path + "': expected " + std::to_string(need) +
                             " bytes, got " + std::to_string(bytes.size() - pos));
  }
  ScalarField f(shape);
  for (Index i = 0; i < shape.size(); ++i) {
    const std::size_t k = pos + static_cast<std::size_t>(i) * bpp;
    f[i] = bpp == 1 ? bytes[k] : static_cast<double>((bytes[k] << 8) | bytes[k + 1]);
  }
  return f;
}

void write_pgm(const std::string& path, const ScalarField& img) {
  const GridShape& shape = img.shape();
  if (shape.ndim() != 2) throw std::invalid_argument("greymap output requires a 2D image");
  std::string data = "P5\n" + std::to_string(shape.dim(1)) + " " + std::to_string(shape.dim(0)) + "\n255\n";
  const std::size_t head = data.size();
  data.resize(head + static_cast<std::size_t>(shape.size()));
  for (Index i = 0; i < shape.size(); ++i) {
    const double v = img[i];
    if (!(v >= 0.0 && v <= 255.0) || v != std::floor(v)) {
      throw std::invalid_argument("greymap output requires integer values in [0, 255]");
    }
    data[head + static_cast<std::size_t>(i)] = static_cast<char>(static_cast<std::uint8_t>(v));
  }
  write_file(path, data.data(), data.size());
}

ScalarField load_field(const std::string& path, const std::optional<GridShape>& expect) {
  if (is_pgm(path)) {
    ScalarField f = read_pgm(path);
    check_expected(f.shape(), expect, path);
    return f;
  }
  return decode(read_raw(path, expect));
}

void save_field(const std::string& path, const ScalarField& f) {
  if (is_pgm(path)) return write_pgm(path, f);
  RawVolume vol;
  const auto dims = f.shape().dims();
  vol.header.dims.assign(dims.begin(), dims.end());
  vol.header.dtype = DType::F64;
  vol.payload.resize(vol.header.payload_bytes());
  for (Index i = 0; i < f.point_count(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(f[i]);
    for (int b = 0; b < 8; ++b) {
      vol.payload[static_cast<std::size_t>(8 * i + b)] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
  }
  write_raw(path, vol);
}

MaskField load_mask(const std::string& path, const std::optional<GridShape>& expect) {
  const ScalarField f = load_field(path, expect);
  MaskField m(f.shape());
  for (Index i = 0; i < f.point_count(); ++i) m.set(i, f[i] != 0.0);
  return m;
}

void save_mask(const std::string& path, const MaskField& m) {
  if (is_pgm(path)) {
    ScalarField f(m.shape());
    for (Index i = 0; i < m.point_count(); ++i) f[i] = m[i] ? 255.0 : 0.0;
    return write_pgm(path, f);
  }
  RawVolume vol;
  const auto dims = m.shape().dims();
  vol.header.dims.assign(dims.begin(), dims.end());
  vol.header.dtype = DType::U8;
  vol.payload.assign(m.values().begin(), m.values().end());
  write_raw(path, vol);
}

ScalarField load_image(const std::string& path) {
  ScalarField f = load_field(path);
  if (f.shape().ndim() != 2) throw std::runtime_error("'" + path + "' is not a 2D image");
  return f;
}

void save_image(const std::string& path, const ScalarField& img) {
  if (img.shape().ndim() != 2) throw std::invalid_argument("save_image requires a 2D field");
  save_field(path, img);
}

ScalarField load_volume(const std::string& path) {
  ScalarField f = load_field(path);
  if (f.shape().ndim() != 3) throw std::runtime_error("'" + path + "' is not a 3D volume");
  return f;
}

void save_volume(const std::string& path, const ScalarField& vol) {
  if (vol.shape().ndim() != 3) throw std::invalid_argument("save_volume requires a 3D field");
  save_field(path, vol);
}

LabelMasks load_labels(const std::string& path, const std::optional<GridShape>& expect) {
  const ScalarField f = load_field(path, expect);
  LabelMasks out{MaskField(f.shape()), MaskField(f.shape())};
  for (Index i = 0; i < f.point_count(); ++i) {
    const double v = f[i];
    if (v == 1.0) {
      out.outside.set(i, true);
    } else if (v == 2.0) {
      out.inside.set(i, true);
    } else if (v != 0.0) {
      throw std::runtime_error("label value " + format_double(v) + " at " + coord_string(f.shape(), i) +
                               " in '" + path + "' is not 0, 1 or 2");
    }
  }
  return out;
}

void save_labels(const std::string& path, const LabelMasks& labels) {
  require_same_shape(labels.outside.shape(), labels.inside.shape(), "save_labels");
  ScalarField f(labels.outside.shape());
  for (Index i = 0; i < f.point_count(); ++i) {
    if (labels.outside[i] && labels.inside[i]) throw std::invalid_argument("save_labels: overlapping labels");
    f[i] = labels.outside[i] ? 1.0 : labels.inside[i] ? 2.0 : 0.0;
  }
  if (is_pgm(path)) return write_pgm(path, f);
  RawVolume vol;
  const auto dims = f.shape().dims();
  vol.header.dims.assign(dims.begin(), dims.end());
  vol.payload.resize(vol.header.payload_bytes());
  for (Index i = 0; i < f.point_count(); ++i) vol.payload[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(f[i]);
  write_raw(path, vol);
}

namespace {

// One accessor pair per config key, in render order.
struct ConfigKey {
  const char* name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

template <typename Group>
ConfigKey real_key(const char* name, Group RunConfig::*group, double Group::*member) {
  return {name, [=](const RunConfig& c) { return format_double(c.*group.*member); },
          [=](RunConfig& c, const std::string& k, const std::string& v) { c.*group.*member = parse_double(k, v); }};
}

template <typename Group>
ConfigKey bool_key(const char* name, Group RunConfig::*group, bool Group::*member) {
  return {name, [=](const RunConfig& c) { return std::string((c.*group.*member) ? "true" : "false"); },
          [=](RunConfig& c, const std::string& k, const std::string& v) { c.*group.*member = parse_bool(k, v); }};
}

ConfigKey int_key(const char* name, int AdmmParams::*member) {
  return {name, [=](const RunConfig& c) { return std::to_string(c.admm.*member); },
          [=](RunConfig& c, const std::string& k, const std::string& v) {
            const long long n = parse_int(k, v);
            if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max()) {
              throw std::invalid_argument("config: '" + k + "' out of range");
            }
            c.admm.*member = static_cast<int>(n);
          }};
}

ConfigKey path_key(const char* name, std::string RunConfig::*member) {
  return {name, [=](const RunConfig& c) { return c.*member; },
          [=](RunConfig& c, const std::string&, const std::string& v) { c.*member = v; }};
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"kind", [](const RunConfig& c) { return std::string(to_string(c.kind)); },
       [](RunConfig& c, const std::string&, const std::string& v) { c.kind = model_kind_from_string(v); }},
      real_key("seg.a", &RunConfig::seg, &SegParams::a),
      real_key("seg.b", &RunConfig::seg, &SegParams::b),
      real_key("seg.mu", &RunConfig::seg, &SegParams::mu),
      real_key("seg.alpha_h", &RunConfig::seg, &SegParams::alpha_h),
      real_key("seg.g_alpha", &RunConfig::seg, &SegParams::g_alpha),
      real_key("seg.g_beta", &RunConfig::seg, &SegParams::g_beta),
      real_key("seg.sigma", &RunConfig::seg, &SegParams::sigma),
      real_key("hull.lambda", &RunConfig::hull, &HullParams::lambda),
      real_key("hull.softplus_t", &RunConfig::hull, &HullParams::softplus_t),
      bool_key("hull.exact_positive_part", &RunConfig::hull, &HullParams::exact_positive_part),
      real_key("admm.rho1", &RunConfig::admm, &AdmmParams::rho1),
      real_key("admm.rho2", &RunConfig::admm, &AdmmParams::rho2),
      real_key("admm.rho3", &RunConfig::admm, &AdmmParams::rho3),
      real_key("admm.epsilon", &RunConfig::admm, &AdmmParams::epsilon),
      int_key("admm.max_iters", &AdmmParams::max_iters),
      real_key("admm.tol", &RunConfig::admm, &AdmmParams::tol),
      int_key("admm.band_refresh", &AdmmParams::band_refresh),
      bool_key("admm.warm_start", &RunConfig::admm, &AdmmParams::warm_start),
      path_key("input", &RunConfig::input),
      path_key("image", &RunConfig::image),
      path_key("labels", &RunConfig::labels),
      path_key("output", &RunConfig::output),
      path_key("diagnostics", &RunConfig::diagnostics),
      {"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
           throw std::invalid_argument("config: '" + k + "' must be a nonnegative integer");
         }
         c.seed = std::stoull(v);
       }},
  };
  return keys;
}

}  // namespace

std::string RunConfig::render() const {
  std::string out;
  for (const auto& key : config_keys()) {
    const std::string v = key.get(*this);
    if (v.find('\n') != std::string::npos || v.find('\r') != std::string::npos) {
      throw std::invalid_argument(std::string("config: value of '") + key.name + "' contains a line break");
    }
    out += std::string(key.name) + "=" + v + "\n";
  }
  return out;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + " has no '=': " + line);
    }
    const std::string k = line.substr(0, eq);
    const auto& keys = config_keys();
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& ck) { return k == ck.name; });
    if (it == keys.end()) throw std::invalid_argument("config: unknown key '" + k + "'");
    if (std::find(seen.begin(), seen.end(), k) != seen.end()) {
      throw std::invalid_argument("config: duplicate key '" + k + "'");
    }
    seen.push_back(k);
    it->set(c, k, line.substr(eq + 1));
  }
  return c;
}

std::vector<std::string> synth_shape_names() {
  return {"disc", "ball", "plus", "L", "star", "two-discs", "box-minus-notch"};
}

namespace {

bool in_star(double x, double y, double outer, double inner) {
  // Ray casting against the 10-vertex star polygon.
  std::array<std::array<double, 2>, 10> v{};
  for (int k = 0; k < 10; ++k) {
    const double r = k % 2 == 0 ? outer : inner;
    const double t = std::numbers::pi / 2.0 + k * std::numbers::pi / 5.0;
    v[static_cast<std::size_t>(k)] = {r * std::cos(t), r * std::sin(t)};
  }
  bool inside = false;
  for (std::size_t i = 0, j = 9; i < 10; j = i++) {
    const auto& a = v[i];
    const auto& b = v[j];
    if ((a[1] > y) != (b[1] > y) && x < (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]) + a[0]) inside = !inside;
  }
  return inside;
}

}  // namespace

MaskField synth_shape(const std::string& name, const GridShape& shape, const SynthParams& params) {
  const int d = shape.ndim();
  double n = static_cast<double>(shape.dim(0));
  for (int a = 1; a < d; ++a) n = std::min(n, static_cast<double>(shape.dim(a)));
  if (d == 3) n *= 0.75;
  if (params.extent > 0.0) n = params.extent;
  std::array<double, 3> center{};
  for (int a = 0; a < d; ++a) center[static_cast<std::size_t>(a)] = 0.5 * static_cast<double>(shape.dim(a) - 1);

  const double radius = params.radius > 0.0 ? params.radius : 0.3 * n;
  const double arm = 0.35 * n;
  const double half_w = 0.1 * n;
  std::function<bool(const std::array<double, 3>&)> inside;

  const auto norm2 = [d](const std::array<double, 3>& x) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += x[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
    return s;
  };
  const auto slab = [d, n](const std::array<double, 3>& x) { return d == 2 || std::abs(x[2]) <= 0.3 * n; };

  if (name == "disc" || name == "ball") {
    if ((name == "disc") != (d == 2)) throw std::invalid_argument("synth: '" + name + "' needs a " + (d == 2 ? "3D" : "2D") + " grid");
    inside = [=](const std::array<double, 3>& x) { return norm2(x) <= radius * radius; };
  } else if (name == "plus") {
    inside = [=](const std::array<double, 3>& x) {
      for (int along = 0; along < d; ++along) {
        bool in = true;
        for (int a = 0; a < d; ++a) {
          const double lim = a == along ? arm : half_w;
          in = in && std::abs(x[static_cast<std::size_t>(a)]) <= lim;
        }
        if (in) return true;
      }
      return false;
    };
  } else if (name == "L") {
    const double t = 0.24 * n;
    inside = [=](const std::array<double, 3>& x) {
      const bool box = std::abs(x[0]) <= arm && std::abs(x[1]) <= arm && slab(x);
      return box && (x[0] >= arm - t || x[1] <= -arm + t);
    };
  } else if (name == "star") {
    // Shifted so the bounding box of the star is centered.
    inside = [=](const std::array<double, 3>& x) {
      return slab(x) && in_star(x[1], -x[0] + 0.038 * n, 0.4 * n, 0.18 * n);
    };
  } else if (name == "two-discs") {
    const double r = params.radius > 0.0 ? params.radius : 0.15 * n;
    const double off = r + 0.5 * params.gap;
    inside = [=](const std::array<double, 3>& x) {
      std::array<double, 3> l = x;
      std::array<double, 3> rr = x;
      l[1] += off;
      rr[1] -= off;
      return norm2(l) <= r * r || norm2(rr) <= r * r;
    };
  } else if (name == "box-minus-notch") {
    inside = [=](const std::array<double, 3>& x) {
      bool box = true;
      for (int a = 0; a < d; ++a) box = box && std::abs(x[static_cast<std::size_t>(a)]) <= arm;
      // Chair profile: a seat slab plus a backrest, notch cut from the top front.
      const bool notch = x[0] < 0.0 && x[1] > -0.1 * n;
      return box && !notch;
    };
  } else {
    throw std::invalid_argument("synth: unknown shape '" + name + "'");
  }

  MaskField m(shape);
  for (Index i = 0; i < shape.size(); ++i) {
    const auto c = shape.coord(i);
    std::array<double, 3> x{};
    for (int a = 0; a < d; ++a) {
      x[static_cast<std::size_t>(a)] = static_cast<double>(c[static_cast<std::size_t>(a)]) - center[static_cast<std::size_t>(a)];
    }
    m.set(i, inside(x));
  }
  if (m.count() == 0) throw std::invalid_argument("synth: shape '" + name + "' is empty on this grid");
  return m;
}

Index outlier_count(Index shape_points, double outlier_fraction) {
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
    throw std::invalid_argument("outlier fraction must lie in [0, 1)");
  }
  return static_cast<Index>(std::llround(outlier_fraction * static_cast<double>(shape_points) / (1.0 - outlier_fraction)));
}

MaskField synth(const std::string& name, const GridShape& shape, double outlier_fraction, std::uint64_t seed,
                const SynthParams& params) {
  MaskField m = synth_shape(name, shape, params);
  const Index n_out = outlier_count(m.count(), outlier_fraction);
  if (n_out == 0) return m;
  const MaskField near = dilate(m, 2.0);
  std::vector<Index> candidates;
  for (Index i = 0; i < shape.size(); ++i) {
    if (!near[i]) candidates.push_back(i);
  }
  if (static_cast<Index>(candidates.size()) < n_out) {
    throw std::invalid_argument("synth: not enough free cells for " + std::to_string(n_out) + " outliers");
  }
  // Partial Fisher-Yates with an explicit modulo draw keeps the result
  // independent of the standard library's distribution implementation.
  std::mt19937_64 rng(seed);
  for (Index k = 0; k < n_out; ++k) {
    const auto span = static_cast<std::uint64_t>(static_cast<Index>(candidates.size()) - k);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t r = rng();
    while (r >= limit) r = rng();
    const auto j = k + static_cast<Index>(r % span);
    std::swap(candidates[static_cast<std::size_t>(k)], candidates[static_cast<std::size_t>(j)]);
    m.set(candidates[static_cast<std::size_t>(k)], true);
  }
  return m;
}

void write_diagnostics(const std::string& path, const std::vector<IterationRecord>& history) {
  std::string out = "iter,objective,res_p,res_Q,res_z,dphi\n";
  for (const auto& r : history) {
    out += std::to_string(r.iter) + "," + format_double(r.objective) + "," + format_double(r.res_p) + "," +
           format_double(r.res_q) + "," + format_double(r.res_z) + "," + format_double(r.dphi) + "\n";
  }
  write_file(path, out.data(), out.size());
}

}  // namespace convexsdf
