#include "crutchlab/grf/filter.hpp"

#include <cmath>
#include <complex>
#include <numbers>

namespace crutchlab::grf {

std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double fs) {
  if (order < 1) throw InvalidInput("filter order must be >= 1");
  if (!(fs > 0.0)) throw InvalidInput("sample rate must be > 0");
  if (!(cutoff_hz > 0.0) || cutoff_hz >= fs / 2.0) throw InvalidInput("cutoff must lie in (0, Nyquist)");

  const double k = 2.0 * fs;
  const double wc = k * std::tan(std::numbers::pi * cutoff_hz / fs);
  std::vector<Biquad> sos;
  for (int i = 0; i < order / 2; ++i) {
    // Conjugate pole pair of the normalized prototype, Re p < 0.
    const double re = -std::sin(std::numbers::pi * (2.0 * i + 1.0) / (2.0 * order));
    const double a0 = k * k - 2.0 * re * wc * k + wc * wc;
    Biquad s;
    s.a = {2.0 * (wc * wc - k * k) / a0, (k * k + 2.0 * re * wc * k + wc * wc) / a0};
    const double g = (1.0 + s.a[0] + s.a[1]) / 4.0;
    s.b = {g, 2.0 * g, g};
    sos.push_back(s);
  }
  if (order % 2 == 1) {
    Biquad s;
    s.a = {(wc - k) / (wc + k), 0.0};
    const double g = (1.0 + s.a[0]) / 2.0;
    s.b = {g, g, 0.0};
    sos.push_back(s);
  }
  return sos;
}

double magnitude_response(const std::vector<Biquad>& sos, double f, double fs) {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * std::numbers::pi * f / fs);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h = 1.0;
  for (const auto& s : sos) h *= (s.b[0] + s.b[1] * z1 + s.b[2] * z2) / (1.0 + s.a[0] * z1 + s.a[1] * z2);
  return std::abs(h);
}

namespace {

// Transposed direct form II, states started at the steady state of a
// constant input equal to the first sample.
Eigen::VectorXd cascade(const std::vector<Biquad>& sos, const Eigen::VectorXd& x) {
  Eigen::VectorXd y = x;
  for (const auto& s : sos) {
    const double x0 = y.size() > 0 ? y(0) : 0.0;
    double z1 = x0 * (1.0 - s.b[0]);
    double z2 = x0 * (s.b[2] - s.a[1]);
    for (Eigen::Index n = 0; n < y.size(); ++n) {
      const double in = y(n);
      const double out = s.b[0] * in + z1;
      z1 = s.b[1] * in - s.a[0] * out + z2;
      z2 = s.b[2] * in - s.a[1] * out;
      y(n) = out;
    }
  }
  return y;
}

}  // namespace

Eigen::VectorXd filtfilt(const std::vector<Biquad>& sos, const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n < 2) return x;
  Eigen::Index taps = 2 * static_cast<Eigen::Index>(sos.size()) + 1;
  bool odd = false;
  for (const auto& s : sos) odd = odd || (s.b[2] == 0.0 && s.a[1] == 0.0);
  if (odd) --taps;
  const Eigen::Index pad = std::min<Eigen::Index>(3 * taps, n - 1);

  Eigen::VectorXd ext(n + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i) {
    ext(i) = 2.0 * x(0) - x(pad - i);
    ext(n + pad + i) = 2.0 * x(n - 1) - x(n - 2 - i);
  }
  ext.segment(pad, n) = x;

  Eigen::VectorXd y = cascade(sos, ext);
  y.reverseInPlace();
  y = cascade(sos, y);
  y.reverseInPlace();
  return y.segment(pad, n);
}

ForceSeries lowpass_filter(const ForceSeries& series, int order, double cutoff_hz) {
  series.validate();
  const auto sos = butterworth_lowpass(order, cutoff_hz, series.sample_rate);
  ForceSeries out = series;
  for (Eigen::Index r = 0; r < 3; ++r) out.samples.row(r) = filtfilt(sos, series.samples.row(r).transpose()).transpose();
  return out;
}

}  // namespace crutchlab::grf
