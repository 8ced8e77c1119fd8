#pragma once

// Radial profiles x -> f(|x|) on R^N.

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "frachenon/errors.hpp"
#include "frachenon/special_functions.hpp"

namespace frachenon {

/// amplitude * r^exponent.
struct PowerLaw {
  double exponent = 0.0;
  double amplitude = 1.0;
};

/// Grid data, monotone cubic (PCHIP) between radii, constant below the first radius
/// and values.back() * (r / radii.back())^{-tail} beyond the last.
struct Sampled {
  std::vector<double> radii;
  std::vector<double> values;
  double tail = 0.0;
};

/// (1 - (r/radius)^2)^power inside the ball, 0 outside.
struct Bump {
  double radius = 1.0;
  int power = 4;
};

class RadialProfile {
 public:
  using Kind = std::variant<PowerLaw, Sampled, Bump>;

  RadialProfile(Kind kind, int N) : kind_(std::move(kind)), N_(N) {
    if (N < 1) throw ParameterError("profile dimension must be >= 1");
    if (auto* s = std::get_if<Sampled>(&kind_)) prepare_sampled(*s);
    if (auto* b = std::get_if<Bump>(&kind_)) {
      if (!(b->radius > 0.0) || b->power < 1) throw ParameterError("bump needs radius > 0 and power >= 1");
    }
    if (auto* p = std::get_if<PowerLaw>(&kind_)) {
      if (!std::isfinite(p->exponent) || !std::isfinite(p->amplitude)) {
        throw ParameterError("power-law parameters must be finite");
      }
    }
  }

  static RadialProfile power_law(int N, double exponent, double amplitude = 1.0) {
    return {PowerLaw{exponent, amplitude}, N};
  }
  static RadialProfile constant(int N, double c) { return {PowerLaw{0.0, c}, N}; }
  static RadialProfile zero(int N) { return constant(N, 0.0); }
  /// v_alpha(r) = r^{-((N-2s)/2 - alpha)}.
  static RadialProfile model_v_alpha(const FracParams& fp, double alpha, double amplitude = 1.0) {
    fp.validate();
    if (!(alpha >= 0.0 && alpha < fp.alpha_max())) throw DomainError("alpha must lie in [0, (N-2s)/2)");
    return power_law(fp.N, -(fp.alpha_max() - alpha), amplitude);
  }
  static RadialProfile bump(int N, double radius = 1.0, int power = 4) { return {Bump{radius, power}, N}; }
  static RadialProfile sampled(int N, std::vector<double> radii, std::vector<double> values, double tail) {
    return {Sampled{std::move(radii), std::move(values), tail}, N};
  }

  const Kind& kind() const { return kind_; }
  int N() const { return N_; }
  bool is_zero() const {
    const auto* p = std::get_if<PowerLaw>(&kind_);
    return p && p->amplitude == 0.0;
  }
  bool is_constant() const {
    const auto* p = std::get_if<PowerLaw>(&kind_);
    return p && (p->exponent == 0.0 || p->amplitude == 0.0);
  }

  double operator()(double r) const { return value(r); }

  double value(double r) const {
    return std::visit(
        [&](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, PowerLaw>) {
            if (k.amplitude == 0.0 || k.exponent == 0.0) return k.amplitude;
            if (!(r > 0.0)) throw DomainError("power-law profile evaluated at the origin");
            return k.amplitude * std::pow(r, k.exponent);
          } else if constexpr (std::is_same_v<T, Bump>) {
            if (r >= k.radius) return 0.0;
            const double q = r / k.radius;
            return std::pow((1.0 - q) * (1.0 + q), k.power);
          } else {
            return sampled_value(k, r);
          }
        },
        kind_);
  }

  /// f(r) - f(r + d), accurate when |d| << r.
  double difference(double r, double d) const {
    if (d == 0.0) return 0.0;
    if (const auto* p = std::get_if<PowerLaw>(&kind_)) {
      if (p->amplitude == 0.0 || p->exponent == 0.0) return 0.0;
      return -p->amplitude * std::pow(r, p->exponent) * std::expm1(p->exponent * std::log1p(d / r));
    }
    if (const auto* b = std::get_if<Bump>(&kind_)) {
      // 1 - q^2 differences through (r+d)^2 - r^2 = d (2r + d).
      const double rr = b->radius * b->radius;
      const double a = std::max(0.0, 1.0 - r * r / rr);
      const double c = std::max(0.0, 1.0 - (r + d) * (r + d) / rr);
      if (a == 0.0 && c == 0.0) return 0.0;
      if (a > 0.0 && c > 0.0) {
        const double delta = d * (2.0 * r + d) / rr;  // a - c
        // a^k - c^k = (a - c) sum_{j} a^{k-1-j} c^j
        double sum = 0.0;
        for (int j = 0; j < b->power; ++j) sum += std::pow(a, b->power - 1 - j) * std::pow(c, j);
        return delta * sum;
      }
      return std::pow(a, b->power) - std::pow(c, b->power);
    }
    return value(r) - value(r + d);
  }

  /// Power behaviour f ~ r^e at the origin (0 for bounded profiles).
  double origin_exponent() const {
    if (const auto* p = std::get_if<PowerLaw>(&kind_)) return p->amplitude == 0.0 ? 0.0 : p->exponent;
    return 0.0;
  }
  /// Growth f ~ r^e at infinity; -inf for compact support.
  double growth_exponent() const {
    if (const auto* p = std::get_if<PowerLaw>(&kind_)) return p->amplitude == 0.0 ? 0.0 : p->exponent;
    if (const auto* s = std::get_if<Sampled>(&kind_)) return -s->tail;
    return -std::numeric_limits<double>::infinity();
  }
  /// Radius beyond which the profile vanishes identically (inf if none).
  double support_radius() const {
    if (const auto* b = std::get_if<Bump>(&kind_)) return b->radius;
    return std::numeric_limits<double>::infinity();
  }
  /// Radii where the profile is not smooth or changes character.
  std::vector<double> features() const {
    if (const auto* b = std::get_if<Bump>(&kind_)) return {b->radius};
    if (const auto* s = std::get_if<Sampled>(&kind_)) {
      if (s->radii.size() <= 256) return s->radii;
      std::vector<double> out;
      const std::size_t stride = (s->radii.size() + 255) / 256;
      for (std::size_t i = 0; i < s->radii.size(); i += stride) out.push_back(s->radii[i]);
      out.push_back(s->radii.back());
      return out;
    }
    return {};
  }
  /// Largest feature radius (0 for scale-free profiles).
  double extent() const {
    auto f = features();
    return f.empty() ? 0.0 : *std::max_element(f.begin(), f.end());
  }

  /// Checks that u lies in L^1(R^N, (1+|x|)^{-N-2s} dx) and is locally integrable.
  void check_admissible(double s) const {
    const double g = growth_exponent();
    if (!(g < 2.0 * s)) {
      throw ParameterError("profile tail grows like r^" + FracParams::fmt(g) +
                           ", outside L^1((1+|x|)^{-N-2s}); need growth exponent < 2s");
    }
    if (!(origin_exponent() > -N_)) {
      throw ParameterError("profile is not locally integrable at the origin (exponent <= -N)");
    }
  }

 private:
  static void prepare_sampled(Sampled& s) {
    if (s.radii.size() < 2 || s.radii.size() != s.values.size()) {
      throw ParameterError("sampled profile needs at least two (radius, value) pairs");
    }
    for (std::size_t i = 0; i < s.radii.size(); ++i) {
      if (!(s.radii[i] > 0.0) || !std::isfinite(s.values[i])) {
        throw ParameterError("sampled profile radii must be positive and values finite");
      }
      if (i > 0 && !(s.radii[i] > s.radii[i - 1])) {
        throw ParameterError("sampled profile radii must be strictly increasing");
      }
    }
    if (!std::isfinite(s.tail)) throw ParameterError("sampled profile tail exponent must be finite");
  }

  // Fritsch-Carlson slopes.
  static double pchip_slope(const Sampled& s, std::size_t i) {
    const std::size_t n = s.radii.size();
    auto secant = [&](std::size_t k) { return (s.values[k + 1] - s.values[k]) / (s.radii[k + 1] - s.radii[k]); };
    if (n == 2) return secant(0);
    if (i == 0 || i == n - 1) {
      const std::size_t k = i == 0 ? 0 : n - 2;
      const std::size_t k2 = i == 0 ? 1 : n - 3;
      const double h0 = s.radii[k + 1] - s.radii[k];
      const double h1 = s.radii[k2 + 1] - s.radii[k2];
      const double d0 = secant(k), d1 = secant(k2);
      double m = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (m * d0 <= 0.0) m = 0.0;
      else if (d0 * d1 <= 0.0 && std::abs(m) > std::abs(3 * d0)) m = 3 * d0;
      return m;
    }
    const double d0 = secant(i - 1), d1 = secant(i);
    if (d0 * d1 <= 0.0) return 0.0;
    const double h0 = s.radii[i] - s.radii[i - 1];
    const double h1 = s.radii[i + 1] - s.radii[i];
    const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
    return (w1 + w2) / (w1 / d0 + w2 / d1);
  }

  static double sampled_value(const Sampled& s, double r) {
    if (r <= s.radii.front()) return s.values.front();
    if (r >= s.radii.back()) return s.values.back() * std::pow(r / s.radii.back(), -s.tail);
    const auto it = std::upper_bound(s.radii.begin(), s.radii.end(), r);
    const std::size_t i = static_cast<std::size_t>(it - s.radii.begin()) - 1;
    const double h = s.radii[i + 1] - s.radii[i];
    const double u = (r - s.radii[i]) / h;
    const double m0 = pchip_slope(s, i) * h;
    const double m1 = pchip_slope(s, i + 1) * h;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
    const double h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u);
    const double h11 = u * u * (u - 1);
    return h00 * s.values[i] + h10 * m0 + h01 * s.values[i + 1] + h11 * m1;
  }

  Kind kind_;
  int N_;
};

/// Reads the two-column profile format: a header line "N=<int> tail=<float>" followed by
/// "<radius> <value>" lines. Blank lines and lines starting with '#' are skipped.
inline RadialProfile parse_profile(std::istream& in) {
  std::string line;
  int lineno = 0;
  int N = -1;
  double tail = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> radii, values;
  auto skip = [](const std::string& l) {
    const auto pos = l.find_first_not_of(" \t\r");
    return pos == std::string::npos || l[pos] == '#';
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (skip(line)) continue;
    if (N < 0) {
      std::istringstream hs(line);
      std::string tok;
      bool have_n = false, have_tail = false;
      while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw FormatError(lineno, "expected key=value in header, got '" + tok + "'");
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        try {
          std::size_t used = 0;
          if (key == "N") {
            N = std::stoi(val, &used);
            have_n = used == val.size();
          } else if (key == "tail") {
            tail = std::stod(val, &used);
            have_tail = used == val.size();
          } else {
            throw FormatError(lineno, "unknown header key '" + key + "'");
          }
        } catch (const std::logic_error&) {
          throw FormatError(lineno, "malformed header value '" + tok + "'");
        }
      }
      if (!have_n || !have_tail || N < 1) throw FormatError(lineno, "header must be 'N=<int> tail=<float>' with N >= 1");
      continue;
    }
    std::istringstream ls(line);
    double r = 0.0, v = 0.0;
    std::string extra;
    if (!(ls >> r >> v) || (ls >> extra)) throw FormatError(lineno, "expected '<radius> <value>'");
    if (!(r > 0.0) || !std::isfinite(v)) throw FormatError(lineno, "radius must be positive and value finite");
    if (!radii.empty() && !(r > radii.back())) throw FormatError(lineno, "radii must be strictly increasing");
    radii.push_back(r);
    values.push_back(v);
  }
  if (N < 0) throw FormatError(std::max(lineno, 1), "missing header line");
  if (radii.size() < 2) throw FormatError(std::max(lineno, 1), "need at least two data lines");
  return RadialProfile::sampled(N, std::move(radii), std::move(values), tail);
}

}  // namespace frachenon
