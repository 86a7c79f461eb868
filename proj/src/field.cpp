#include "superdiff/field.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "superdiff/error.hpp"
#include "superdiff/fft.hpp"
#include "superdiff/rng.hpp"

namespace superdiff::env {
namespace {

int signed_frequency(int k, int n) { return k <= n / 2 ? k : k - n; }

void validate_grid(double box_size, int grid_count) {
  if (!(box_size > 0.0) || !std::isfinite(box_size))
    throw ConfigError("field: box size L must be positive");
  if (grid_count <= 0) throw ConfigError("field: grid count N must be positive");
}

std::vector<std::complex<double>> modes_from_grid(int n, std::span<const double> grid) {
  std::vector<std::complex<double>> modes(fft::half_size(n));
  fft::forward_r2c(n, grid, modes);
  const double scale = 1.0 / (static_cast<double>(n) * n);
  for (auto& m : modes) m *= scale;
  return modes;
}

}  // namespace

FieldSample::FieldSample(EnvModel model, double box_size, int grid_count, std::uint64_t seed,
                         std::vector<double> omega1, std::vector<double> omega2,
                         std::vector<std::complex<double>> modes1,
                         std::vector<std::complex<double>> modes2)
    : model_(model),
      box_(box_size),
      n_(grid_count),
      seed_(seed),
      omega1_(std::move(omega1)),
      omega2_(std::move(omega2)),
      modes1_(std::move(modes1)),
      modes2_(std::move(modes2)) {
  validate_grid(box_size, grid_count);
  const std::size_t cells = static_cast<std::size_t>(n_) * n_;
  if (omega1_.size() != cells || omega2_.size() != cells)
    throw ConfigError("field: component arrays must have N*N entries");
  if (modes1_.size() != fft::half_size(n_) || modes2_.size() != fft::half_size(n_))
    throw ConfigError("field: mode arrays must have N*(N/2+1) entries");
}

FieldSample FieldSample::constant(double box_size, int grid_count, Vec2 value, EnvModel model) {
  validate_grid(box_size, grid_count);
  const std::size_t cells = static_cast<std::size_t>(grid_count) * grid_count;
  std::vector<std::complex<double>> m1(fft::half_size(grid_count)), m2(m1.size());
  m1[0] = value.x;
  m2[0] = value.y;
  return FieldSample(model, box_size, grid_count, 0, std::vector<double>(cells, value.x),
                     std::vector<double>(cells, value.y), std::move(m1), std::move(m2));
}

Vec2 FieldSample::wavevector(int k1, int k2) const noexcept {
  const double dk = 2.0 * kPi / box_;
  return {dk * signed_frequency(k1, n_), dk * k2};
}

FieldSample sample_field(const CovarianceSpec& spec, double box_size, int grid_count,
                         std::uint64_t seed) {
  validate_grid(box_size, grid_count);
  if (grid_count % 2 != 0 || grid_count < 16)
    throw ConfigError("sample_field: N must be even and >= 16");
  if (!(box_size > 10.0 * spec.mollifier.sigma()))
    throw ConfigError("sample_field: box size must exceed 10 sigma");

  const int n = grid_count;
  const int half = n / 2;
  const int stride = half + 1;
  std::vector<std::complex<double>> m1(fft::half_size(n)), m2(fft::half_size(n));
  const double inv_box = 1.0 / box_size;
  const double dk = 2.0 * kPi / box_size;
  const std::complex<double> imag_unit(0.0, 1.0);

  for (int k1 = 0; k1 < n; ++k1) {
    if (k1 == half) continue;
    const int f1 = signed_frequency(k1, n);
    for (int k2 = 0; k2 < half; ++k2) {
      if (k2 == 0 && f1 <= 0) continue;  // filled from its conjugate partner below
      const Vec2 p{dk * f1, dk * k2};
      const std::size_t idx = static_cast<std::size_t>(k1) * stride + k2;
      const auto [g1, g2] = rng::normal_pair(seed, idx, 0);
      const std::complex<double> xi(g1 * std::sqrt(0.5), g2 * std::sqrt(0.5));
      const double amp = spec.mollifier.u_hat(p) * inv_box;
      std::complex<double> w1, w2;
      if (spec.model == EnvModel::ScalarAniso) {
        w1 = amp * xi;
      } else {
        const Vec2 e = polarization(spec.model, p);
        w1 = imag_unit * (amp * e.x) * xi;
        w2 = imag_unit * (amp * e.y) * xi;
      }
      m1[idx] = w1;
      m2[idx] = w2;
      if (k2 == 0) {
        const std::size_t partner = static_cast<std::size_t>(n - k1) * stride;
        m1[partner] = std::conj(w1);
        m2[partner] = std::conj(w2);
      }
    }
  }

  const std::size_t cells = static_cast<std::size_t>(n) * n;
  std::vector<double> g1(cells), g2(cells, 0.0);
  fft::inverse_c2r(n, m1, g1);
  if (spec.model != EnvModel::ScalarAniso) fft::inverse_c2r(n, m2, g2);
  return FieldSample(spec.model, box_size, n, seed, std::move(g1), std::move(g2), std::move(m1),
                     std::move(m2));
}

Vec2 evaluate_field(const FieldSample& sample, Vec2 x) {
  const int n = sample.grid_count();
  const double inv_h = n / sample.box_size();
  const double u = x.x * inv_h;
  const double v = x.y * inv_h;
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const double tu = u - fu;
  const double tv = v - fv;
  // Wrap the integer cell index; long long covers large unwrapped coordinates.
  auto wrap = [n](double f) {
    long long i = static_cast<long long>(f) % n;
    return static_cast<int>(i < 0 ? i + n : i);
  };
  const int i0 = wrap(fu);
  const int j0 = wrap(fv);
  const int i1 = i0 + 1 == n ? 0 : i0 + 1;
  const int j1 = j0 + 1 == n ? 0 : j0 + 1;
  const std::size_t a = static_cast<std::size_t>(i0) * n + j0;
  const std::size_t b = static_cast<std::size_t>(i0) * n + j1;
  const std::size_t c = static_cast<std::size_t>(i1) * n + j0;
  const std::size_t d = static_cast<std::size_t>(i1) * n + j1;
  const double w00 = (1.0 - tu) * (1.0 - tv);
  const double w01 = (1.0 - tu) * tv;
  const double w10 = tu * (1.0 - tv);
  const double w11 = tu * tv;
  const auto c1 = sample.component(0);
  const auto c2 = sample.component(1);
  return {w00 * c1[a] + w01 * c1[b] + w10 * c1[c] + w11 * c1[d],
          w00 * c2[a] + w01 * c2[b] + w10 * c2[c] + w11 * c2[d]};
}

namespace {

template <class Proj>
double max_mode_projection(const FieldSample& s, Proj proj) {
  const int n = s.grid_count();
  const int stride = n / 2 + 1;
  const auto m1 = s.modes(0);
  const auto m2 = s.modes(1);
  double worst = 0.0;
  for (int k1 = 0; k1 < n; ++k1)
    for (int k2 = 0; k2 < stride; ++k2) {
      const std::size_t idx = static_cast<std::size_t>(k1) * stride + k2;
      const Vec2 w = proj(s.wavevector(k1, k2));
      worst = std::max(worst, std::abs(w.x * m1[idx] + w.y * m2[idx]));
    }
  return worst;
}

}  // namespace

double max_spectral_divergence(const FieldSample& sample) {
  return max_mode_projection(sample, [](Vec2 p) { return p; });
}

double max_spectral_rotation(const FieldSample& sample) {
  return max_mode_projection(sample, [](Vec2 p) { return tilde(p); });
}

void write_csv(const FieldSample& s, std::ostream& out) {
  out << "x,y,omega1,omega2\n";
  const int n = s.grid_count();
  char line[128];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 x = s.node(i, j);
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", x.x, x.y, s.value(0, i, j),
                    s.value(1, i, j));
      out << line;
    }
}

void write_csv(const FieldSample& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(s, out);
  if (!out) throw IoError("write failed for '" + path + "'");
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary field dumps assume a little-endian host");

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw IoError("binary field dump truncated");
  return v;
}

}  // namespace

void write_binary(const FieldSample& s, std::ostream& out) {
  put<double>(out, s.box_size());
  put<std::int64_t>(out, s.grid_count());
  put<std::int64_t>(out, static_cast<std::int64_t>(s.model()));
  put<std::uint64_t>(out, s.seed());
  for (int k = 0; k < 2; ++k) {
    const auto c = s.component(k);
    out.write(reinterpret_cast<const char*>(c.data()),
              static_cast<std::streamsize>(c.size() * sizeof(double)));
  }
}

void write_binary(const FieldSample& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_binary(s, out);
  if (!out) throw IoError("write failed for '" + path + "'");
}

FieldSample read_binary(std::istream& in) {
  const double box = get<double>(in);
  const auto n64 = get<std::int64_t>(in);
  const auto model_id = get<std::int64_t>(in);
  const auto seed = get<std::uint64_t>(in);
  if (n64 <= 0 || n64 > (1 << 15)) throw IoError("binary field dump: bad grid count");
  if (model_id < 0 || model_id > 2) throw IoError("binary field dump: bad model id");
  const int n = static_cast<int>(n64);
  const std::size_t cells = static_cast<std::size_t>(n) * n;
  std::vector<double> c1(cells), c2(cells);
  for (auto* c : {&c1, &c2}) {
    in.read(reinterpret_cast<char*>(c->data()), static_cast<std::streamsize>(cells * sizeof(double)));
    if (!in) throw IoError("binary field dump truncated");
  }
  auto m1 = modes_from_grid(n, c1);
  auto m2 = modes_from_grid(n, c2);
  return FieldSample(static_cast<EnvModel>(model_id), box, n, seed, std::move(c1), std::move(c2),
                     std::move(m1), std::move(m2));
}

FieldSample read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_binary(in);
}

}  // namespace superdiff::env
