#pragma once

#include <array>
#include <span>
#include <vector>

namespace ember {

struct XYZ {
  double X = 0, Y = 0, Z = 0;

  friend XYZ operator+(XYZ a, XYZ b) { return {a.X + b.X, a.Y + b.Y, a.Z + b.Z}; }
  friend XYZ operator*(XYZ a, double s) { return {a.X * s, a.Y * s, a.Z * s}; }
  friend XYZ operator*(double s, XYZ a) { return a * s; }
  XYZ& operator+=(XYZ b) { X += b.X; Y += b.Y; Z += b.Z; return *this; }
  friend bool operator==(XYZ, XYZ) = default;
};

struct LinearRGB {
  double r = 0, g = 0, b = 0;

  friend LinearRGB operator+(LinearRGB a, LinearRGB b) { return {a.r + b.r, a.g + b.g, a.b + b.b}; }
  friend LinearRGB operator*(LinearRGB a, double s) { return {a.r * s, a.g * s, a.b * s}; }
  friend LinearRGB operator*(double s, LinearRGB a) { return a * s; }
  LinearRGB& operator+=(LinearRGB o) { r += o.r; g += o.g; b += o.b; return *this; }
  friend bool operator==(LinearRGB, LinearRGB) = default;
};

// Always within [0,1]^3.
struct DisplayRGB {
  double r = 0, g = 0, b = 0;
  friend bool operator==(DisplayRGB, DisplayRGB) = default;
};

struct Mat3 {
  std::array<std::array<double, 3>, 3> m{};

  std::array<double, 3> operator*(const std::array<double, 3>& v) const {
    return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
  }
  Mat3 operator*(const Mat3& o) const;
  Mat3 inverse() const;
};

// CIECAM02 chromatic adaptation matrix (XYZ -> LMS).
inline constexpr Mat3 kCat02{{{{0.7328, 0.4296, -0.1624},
                                {-0.7036, 1.6975, 0.0061},
                                {0.0030, 0.0136, 0.9834}}}};
// XYZ -> linear sRGB (D65).
inline constexpr Mat3 kXyzToSrgb{{{{3.2404542, -1.5371385, -0.4985314},
                                   {-0.9692660, 1.8760108, 0.0415560},
                                   {0.0556434, -0.2040259, 1.0572252}}}};
inline constexpr XYZ kD65White{0.95047, 1.0, 1.08883};

// Physical constants used by planck_radiance.
inline constexpr double kPlanck = 6.62607015e-34;     // J s
inline constexpr double kLightSpeed = 2.99792458e8;   // m/s
inline constexpr double kBoltzmann = 1.380649e-23;    // J/K

// CIE 1931 2-degree colour matching functions sampled on a wavelength grid.
struct SpectralTable {
  std::vector<double> wavelengths;  // metres, ascending
  std::vector<double> xbar, ybar, zbar;

  std::size_t size() const { return wavelengths.size(); }

  // The shipped 5 nm table resampled (linear interpolation) onto `samples`
  // uniformly spaced wavelengths spanning [lo, hi] inclusive.
  static SpectralTable cie1931(int samples = 40, double lo = 380e-9, double hi = 780e-9);
  // Shared default table (40 samples, 380-780 nm).
  static const SpectralTable& standard();
};

// Raw 5 nm CIE 1931 table, 380-780 nm (81 rows of xbar, ybar, zbar).
std::span<const std::array<double, 3>> cie1931_5nm();

// Spectral radiance of a blackbody, W sr^-1 m^-3. Throws ContractViolation
// for T <= 0 or wavelength <= 0.
double planck_radiance(double wavelength, double T);
std::vector<double> planck_spectrum(const SpectralTable& table, double T);

// Trapezoidal integral of samples * (xbar, ybar, zbar) over wavelength.
XYZ spectrum_to_xyz(std::span<const double> samples, const SpectralTable& table);

// Full von Kries adaptation in CAT02 LMS space mapping the luminance-
// normalised `white` onto D65.
class ChromaticAdapter {
 public:
  explicit ChromaticAdapter(XYZ white);
  // White is the blackbody at T_max.
  ChromaticAdapter(double T_max, const SpectralTable& table);

  XYZ operator()(XYZ c) const;
  const Mat3& matrix() const { return combined_; }

 private:
  Mat3 combined_;
};

XYZ adapt_cat02(XYZ color, double T_max, const SpectralTable& table);

LinearRGB xyz_to_linear(XYZ c);
double aces_fit(double x);
double srgb_encode(double linear);
double srgb_decode(double encoded);
// Exposure, per-channel ACES curve, then sRGB gamma.
DisplayRGB tonemap(LinearRGB c, double exposure);
DisplayRGB xyz_to_display(XYZ c, double exposure);

// XYZ emission of a blackbody tabulated against temperature for fast lookup
// during ray marching. Linear interpolation between nodes; exact at nodes.
class BlackbodyTable {
 public:
  BlackbodyTable(const SpectralTable& table, double T_lo, double T_hi, double step);

  XYZ operator()(double T) const;
  double T_lo() const { return lo_; }
  double T_hi() const { return lo_ + step_ * static_cast<double>(nodes_.size() - 1); }
  double step() const { return step_; }

 private:
  double lo_, step_;
  std::vector<XYZ> nodes_;
};

}  // namespace ember
