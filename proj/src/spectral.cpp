#include "ember/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "ember/common.hpp"

namespace ember {

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j] + m[i][2] * o.m[2][j];
  return r;
}

Mat3 Mat3::inverse() const {
  const auto& a = m;
  const double c00 = a[1][1] * a[2][2] - a[1][2] * a[2][1];
  const double c01 = a[1][2] * a[2][0] - a[1][0] * a[2][2];
  const double c02 = a[1][0] * a[2][1] - a[1][1] * a[2][0];
  const double det = a[0][0] * c00 + a[0][1] * c01 + a[0][2] * c02;
  require(det != 0.0, "Mat3::inverse: singular matrix");
  const double s = 1.0 / det;
  Mat3 r;
  r.m = {{{c00 * s, (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * s,
           (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * s},
          {c01 * s, (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * s,
           (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * s},
          {c02 * s, (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * s,
           (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * s}}};
  return r;
}

SpectralTable SpectralTable::cie1931(int samples, double lo, double hi) {
  require(samples >= 2 && hi > lo && lo > 0, "SpectralTable: bad sampling");
  const auto raw = cie1931_5nm();
  SpectralTable t;
  for (int n = 0; n < samples; ++n) {
    const double lambda = lo + (hi - lo) * n / (samples - 1);
    t.wavelengths.push_back(lambda);
    // Position in the 5 nm table; zero outside its 380-780 nm support.
    const double g = (lambda * 1e9 - 380.0) / 5.0;
    std::array<double, 3> v{};
    if (g >= 0.0 && g <= 80.0) {
      const int i0 = std::min(static_cast<int>(g), 79);
      const double f = g - i0;
      for (int c = 0; c < 3; ++c) v[c] = raw[i0][c] + f * (raw[i0 + 1][c] - raw[i0][c]);
    }
    t.xbar.push_back(v[0]);
    t.ybar.push_back(v[1]);
    t.zbar.push_back(v[2]);
  }
  return t;
}

const SpectralTable& SpectralTable::standard() {
  static const SpectralTable table = cie1931();
  return table;
}

double planck_radiance(double wavelength, double T) {
  require(T > 0.0, "planck_radiance: T must be positive");
  require(wavelength > 0.0, "planck_radiance: wavelength must be positive");
  const double l5 = std::pow(wavelength, 5);
  const double x = kPlanck * kLightSpeed / (wavelength * kBoltzmann * T);
  return 2.0 * kPlanck * kLightSpeed * kLightSpeed / l5 / std::expm1(x);
}

std::vector<double> planck_spectrum(const SpectralTable& table, double T) {
  std::vector<double> s;
  s.reserve(table.size());
  for (double l : table.wavelengths) s.push_back(planck_radiance(l, T));
  return s;
}

XYZ spectrum_to_xyz(std::span<const double> samples, const SpectralTable& table) {
  require(samples.size() == table.size(), "spectrum_to_xyz: length mismatch");
  XYZ acc;
  for (std::size_t n = 0; n + 1 < samples.size(); ++n) {
    const double w = 0.5 * (table.wavelengths[n + 1] - table.wavelengths[n]);
    const double a = samples[n], b = samples[n + 1];
    acc.X += w * (a * table.xbar[n] + b * table.xbar[n + 1]);
    acc.Y += w * (a * table.ybar[n] + b * table.ybar[n + 1]);
    acc.Z += w * (a * table.zbar[n] + b * table.zbar[n + 1]);
  }
  return acc;
}

ChromaticAdapter::ChromaticAdapter(XYZ white) {
  require(white.Y > 0.0, "ChromaticAdapter: white has no luminance");
  const XYZ w = white * (1.0 / white.Y);
  const auto lms_white = kCat02 * std::array<double, 3>{w.X, w.Y, w.Z};
  const auto lms_target = kCat02 * std::array<double, 3>{kD65White.X, kD65White.Y, kD65White.Z};
  Mat3 gain;
  for (int i = 0; i < 3; ++i) {
    require(lms_white[i] > 0.0, "ChromaticAdapter: degenerate white (LMS component <= 0)");
    gain.m[i][i] = lms_target[i] / lms_white[i];
  }
  combined_ = kCat02.inverse() * gain * kCat02;
}

ChromaticAdapter::ChromaticAdapter(double T_max, const SpectralTable& table)
    : ChromaticAdapter(spectrum_to_xyz(planck_spectrum(table, T_max), table)) {}

XYZ ChromaticAdapter::operator()(XYZ c) const {
  const auto v = combined_ * std::array<double, 3>{c.X, c.Y, c.Z};
  return {v[0], v[1], v[2]};
}

XYZ adapt_cat02(XYZ color, double T_max, const SpectralTable& table) {
  return ChromaticAdapter(T_max, table)(color);
}

LinearRGB xyz_to_linear(XYZ c) {
  const auto v = kXyzToSrgb * std::array<double, 3>{c.X, c.Y, c.Z};
  return {v[0], v[1], v[2]};
}

double aces_fit(double x) {
  if (!(x > 0.0)) return 0.0;
  const double y = x * (2.51 * x + 0.03) / (x * (2.43 * x + 0.59) + 0.14);
  return std::clamp(y, 0.0, 1.0);
}

double srgb_encode(double v) {
  v = std::clamp(v, 0.0, 1.0);
  if (v == 1.0) return 1.0;  // 1.055 - 0.055 rounds below one
  return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

double srgb_decode(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

DisplayRGB tonemap(LinearRGB c, double exposure) {
  return {srgb_encode(aces_fit(c.r * exposure)), srgb_encode(aces_fit(c.g * exposure)),
          srgb_encode(aces_fit(c.b * exposure))};
}

DisplayRGB xyz_to_display(XYZ c, double exposure) { return tonemap(xyz_to_linear(c), exposure); }

BlackbodyTable::BlackbodyTable(const SpectralTable& table, double T_lo, double T_hi, double step)
    : lo_(T_lo), step_(step) {
  require(T_lo > 0.0 && T_hi > T_lo && step > 0.0, "BlackbodyTable: bad range");
  const auto count = static_cast<std::size_t>(std::ceil((T_hi - T_lo) / step)) + 1;
  nodes_.reserve(count);
  for (std::size_t n = 0; n < count; ++n)
    nodes_.push_back(spectrum_to_xyz(planck_spectrum(table, T_lo + step * n), table));
}

XYZ BlackbodyTable::operator()(double T) const {
  double g = (T - lo_) / step_;
  if (!(g > 0.0)) return nodes_.front();
  const auto last = static_cast<double>(nodes_.size() - 1);
  if (g >= last) return nodes_.back();
  const auto i = static_cast<std::size_t>(g);
  const double f = g - static_cast<double>(i);
  if (f == 0.0) return nodes_[i];
  return nodes_[i] * (1.0 - f) + nodes_[i + 1] * f;
}

}  // namespace ember
