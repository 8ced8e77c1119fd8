#pragma once

// Singularity-aware adaptive quadrature.
//
// Everything is built on one global-adaptive Gauss-Kronrod (21-point) engine
// that works on a list of segments. Each segment carries a change of variable
// u in [0,1] -> x that removes a declared algebraic endpoint behaviour
// (x-a)^e, or maps a semi-infinite tail with declared decay x^{-d} onto a
// bounded integrand. Integrands may be scalar or std::array valued; array
// integrands share nodes and refinement.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

namespace frachenon::quadrature {

struct EndpointExponents {
  double left = 0.0;
  double right = 0.0;
};

struct QuadratureSpec {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_subdivisions = 2000;
  /// Power-law behaviour of the integrand at each end, (x-a)^left and (b-x)^right.
  EndpointExponents endpoint_exponents{};

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
      throw std::invalid_argument("quadrature tolerances must be positive");
    }
    if (max_subdivisions < 1) {
      throw std::invalid_argument("max_subdivisions must be >= 1");
    }
    if (!(endpoint_exponents.left > -1.0) || !(endpoint_exponents.right > -1.0)) {
      throw std::invalid_argument("endpoint exponents must exceed -1 for integrability");
    }
  }

  QuadratureSpec with_exponents(double left, double right) const {
    QuadratureSpec out = *this;
    out.endpoint_exponents = {left, right};
    return out;
  }
  QuadratureSpec scaled_tolerances(double factor) const {
    QuadratureSpec out = *this;
    out.abs_tol *= factor;
    out.rel_tol *= factor;
    return out;
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions_used = 0;
  bool converged = true;
};

template <std::size_t K>
struct VectorResult {
  std::array<double, K> value{};
  std::array<double, K> error_estimate{};
  int subdivisions_used = 0;
  bool converged = true;
};

// ---------------------------------------------------------------------------
// Segments and variable maps

enum class MapKind { Linear, LeftPower, RightPower, Tail };

/// Integration segment. For power maps the parameter is the endpoint exponent e,
/// for the tail map it is the decay exponent d > 1 of |f(x)| ~ x^{-d}.
struct Segment {
  double a = 0.0;
  double b = 0.0;
  MapKind kind = MapKind::Linear;
  double parameter = 0.0;

  static Segment linear(double a, double b) { return {a, b, MapKind::Linear, 0.0}; }
  static Segment left_power(double a, double b, double e) {
    return {a, b, e == 0.0 ? MapKind::Linear : MapKind::LeftPower, e};
  }
  static Segment right_power(double a, double b, double e) {
    return {a, b, e == 0.0 ? MapKind::Linear : MapKind::RightPower, e};
  }
  /// [a, +inf), a > 0.
  static Segment tail(double a, double decay) {
    return {a, std::numeric_limits<double>::infinity(), MapKind::Tail, decay};
  }

  /// Returns (x, dx/du) for u in (0,1).
  std::pair<double, double> map(double u) const {
    switch (kind) {
      case MapKind::Linear:
        return {a + (b - a) * u, b - a};
      case MapKind::LeftPower: {
        const double q = 1.0 / (1.0 + parameter);
        const double uq = std::pow(u, q);
        return {a + (b - a) * uq, (b - a) * q * uq / u};
      }
      case MapKind::RightPower: {
        // u measures the distance from b so that x near b keeps full precision.
        const double q = 1.0 / (1.0 + parameter);
        const double uq = std::pow(u, q);
        return {b - (b - a) * uq, (b - a) * q * uq / u};
      }
      case MapKind::Tail: {
        const double q = 1.0 / (parameter - 1.0);
        const double x = a * std::pow(u, -q);
        return {x, a * q * x / (a * u)};
      }
    }
    return {0.0, 0.0};
  }
};

namespace detail {

// Kronrod 21-point abscissae and weights with the embedded 10-point Gauss rule.
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525478532, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <typename T>
struct ValueTraits;

template <>
struct ValueTraits<double> {
  static constexpr std::size_t size = 1;
  static double get(double v, std::size_t) { return v; }
};

template <std::size_t K>
struct ValueTraits<std::array<double, K>> {
  static constexpr std::size_t size = K;
  static double get(const std::array<double, K>& v, std::size_t i) { return v[i]; }
};

template <std::size_t K>
struct Box {
  std::size_t segment;
  double u0;
  double u1;
  std::array<double, K> value;
  std::array<double, K> error;
  double priority;
};

template <std::size_t K, typename F>
void gk21(const F& f, const Segment& seg, Box<K>& box) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr double uflow = std::numeric_limits<double>::min();
  const double centre = 0.5 * (box.u0 + box.u1);
  const double half = 0.5 * (box.u1 - box.u0);

  std::array<std::array<double, K>, 21> fv{};
  auto eval = [&](double u) {
    std::array<double, K> out{};
    const auto [x, jac] = seg.map(u);
    if (!std::isfinite(x) || std::abs(x) > 1e150 || !std::isfinite(jac)) {
      return out;  // far tail: contribution below double resolution
    }
    const auto v = f(x);
    for (std::size_t k = 0; k < K; ++k) {
      const double y = ValueTraits<std::decay_t<decltype(v)>>::get(v, k) * jac;
      out[k] = std::isfinite(y) ? y : 0.0;
    }
    return out;
  };
  fv[10] = eval(centre);
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    fv[j] = eval(centre - dx);
    fv[20 - j] = eval(centre + dx);
  }
  for (std::size_t k = 0; k < K; ++k) {
    double resk = kWgk[10] * fv[10][k];
    double resg = 0.0;
    double resabs = std::abs(resk);
    for (int j = 0; j < 10; ++j) {
      const double pair = fv[j][k] + fv[20 - j][k];
      resk += kWgk[j] * pair;
      resabs += kWgk[j] * (std::abs(fv[j][k]) + std::abs(fv[20 - j][k]));
      if (j % 2 == 1) resg += kWg[j / 2] * pair;
    }
    const double mean = 0.5 * resk;
    double resasc = kWgk[10] * std::abs(fv[10][k] - mean);
    for (int j = 0; j < 10; ++j) {
      resasc += kWgk[j] * (std::abs(fv[j][k] - mean) + std::abs(fv[20 - j][k] - mean));
    }
    const double result = resk * half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);
    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) {
      err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    if (resabs > uflow / (50.0 * eps)) {
      err = std::max(50.0 * eps * resabs, err);
    }
    box.value[k] = result;
    box.error[k] = err;
  }
}

}  // namespace detail

/// Global adaptive integration over a union of segments.
template <std::size_t K, typename F>
VectorResult<K> integrate_segments_vec(const F& f, const std::vector<Segment>& segments,
                                       const QuadratureSpec& spec) {
  using detail::Box;
  VectorResult<K> out{};
  std::vector<Box<K>> heap;
  heap.reserve(segments.size() + 2 * static_cast<std::size_t>(spec.max_subdivisions) + 2);

  auto priority = [&](const Box<K>& b, const std::array<double, K>& total) {
    double p = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(total[k]));
      p = std::max(p, b.error[k] / tol);
    }
    return p;
  };
  auto cmp = [](const Box<K>& l, const Box<K>& r) { return l.priority < r.priority; };

  std::array<double, K> total{};
  std::array<double, K> total_err{};
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Segment& s = segments[i];
    if (!(s.b > s.a)) continue;
    Box<K> box{i, 0.0, 1.0, {}, {}, 0.0};
    detail::gk21<K>(f, s, box);
    heap.push_back(box);
    for (std::size_t k = 0; k < K; ++k) {
      total[k] += box.value[k];
      total_err[k] += box.error[k];
    }
  }

  auto satisfied = [&]() {
    for (std::size_t k = 0; k < K; ++k) {
      if (total_err[k] > std::max(spec.abs_tol, spec.rel_tol * std::abs(total[k]))) return false;
    }
    return true;
  };

  for (auto& b : heap) b.priority = priority(b, total);
  std::make_heap(heap.begin(), heap.end(), cmp);

  int subdivisions = 0;
  while (!heap.empty() && !satisfied()) {
    if (subdivisions >= spec.max_subdivisions) {
      out.converged = false;
      break;
    }
    std::pop_heap(heap.begin(), heap.end(), cmp);
    Box<K> worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.u0 + worst.u1);
    if (!(mid > worst.u0 && mid < worst.u1)) {
      // Interval exhausted at machine resolution; keep it as is.
      worst.priority = 0.0;
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end(), cmp);
      out.converged = false;
      break;
    }
    Box<K> left{worst.segment, worst.u0, mid, {}, {}, 0.0};
    Box<K> right{worst.segment, mid, worst.u1, {}, {}, 0.0};
    detail::gk21<K>(f, segments[worst.segment], left);
    detail::gk21<K>(f, segments[worst.segment], right);
    for (std::size_t k = 0; k < K; ++k) {
      total[k] += left.value[k] + right.value[k] - worst.value[k];
      total_err[k] += left.error[k] + right.error[k] - worst.error[k];
    }
    left.priority = priority(left, total);
    right.priority = priority(right, total);
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), cmp);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), cmp);
    ++subdivisions;
  }

  // Re-sum from the final boxes to avoid drift from incremental updates.
  std::array<double, K> sum{};
  std::array<double, K> err{};
  for (const auto& b : heap) {
    for (std::size_t k = 0; k < K; ++k) {
      sum[k] += b.value[k];
      err[k] += b.error[k];
    }
  }
  out.value = sum;
  out.error_estimate = err;
  out.subdivisions_used = subdivisions;
  if (out.converged) {
    for (std::size_t k = 0; k < K; ++k) {
      if (err[k] > std::max(spec.abs_tol, spec.rel_tol * std::abs(sum[k]))) out.converged = false;
    }
  }
  return out;
}

template <typename F>
QuadratureResult integrate_segments(const F& f, const std::vector<Segment>& segments,
                                    const QuadratureSpec& spec) {
  auto r = integrate_segments_vec<1>([&](double x) { return std::array<double, 1>{f(x)}; },
                                     segments, spec);
  return {r.value[0], r.error_estimate[0], r.subdivisions_used, r.converged};
}

/// Builds segments for [a,b] with interior breakpoints; the first and last segment
/// absorb the declared endpoint exponents. b may be +inf, in which case
/// `tail_decay` (> 1) describes |f(x)| ~ x^{-tail_decay} beyond the last breakpoint.
inline std::vector<Segment> make_segments(double a, double b, std::vector<double> breakpoints,
                                          EndpointExponents exps, double tail_decay = 0.0) {
  const bool infinite = std::isinf(b);
  std::vector<double> pts;
  pts.push_back(a);
  std::sort(breakpoints.begin(), breakpoints.end());
  for (double p : breakpoints) {
    if (p > a && (infinite || p < b) && p > pts.back()) pts.push_back(p);
  }
  if (infinite) {
    if (!(tail_decay > 1.0)) throw std::invalid_argument("tail decay exponent must exceed 1");
    if (pts.size() == 1) pts.push_back(a > 0.0 ? 2.0 * a : (a == 0.0 ? 1.0 : 0.5 * std::abs(a)));
    if (!(pts.back() > 0.0)) pts.push_back(1.0);
  } else {
    pts.push_back(b);
  }
  std::vector<Segment> segs;
  const std::size_t n = pts.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = pts[i];
    const double hi = pts[i + 1];
    const bool first = (i == 0);
    const bool last = (!infinite && i + 1 == n);
    if (first && last && exps.left != 0.0 && exps.right != 0.0) {
      const double m = 0.5 * (lo + hi);
      segs.push_back(Segment::left_power(lo, m, exps.left));
      segs.push_back(Segment::right_power(m, hi, exps.right));
    } else if (first && exps.left != 0.0) {
      segs.push_back(Segment::left_power(lo, hi, exps.left));
    } else if (last && exps.right != 0.0) {
      segs.push_back(Segment::right_power(lo, hi, exps.right));
    } else {
      segs.push_back(Segment::linear(lo, hi));
    }
  }
  if (infinite) segs.push_back(Segment::tail(pts.back(), tail_decay));
  return segs;
}

/// Integral of f over [a,b] where f behaves like (x-a)^left and (b-x)^right at the ends.
template <typename F>
QuadratureResult integrate_power_weight(const F& f, double a, double b, const QuadratureSpec& spec,
                                        std::vector<double> breakpoints = {}) {
  spec.validate();
  if (!(b > a)) {
    if (a == b) return {};
    throw std::invalid_argument("integrate_power_weight: require a <= b");
  }
  return integrate_segments(f, make_segments(a, b, std::move(breakpoints), spec.endpoint_exponents),
                            spec);
}

/// Integral over [a, inf) of f with |f(x)| ~ x^{-decay}; spec.endpoint_exponents.left applies at a.
template <typename F>
QuadratureResult integrate_to_infinity(const F& f, double a, double decay, const QuadratureSpec& spec,
                                       std::vector<double> breakpoints = {}) {
  spec.validate();
  return integrate_segments(
      f, make_segments(a, std::numeric_limits<double>::infinity(), std::move(breakpoints),
                       {spec.endpoint_exponents.left, 0.0}, decay),
      spec);
}

// ---------------------------------------------------------------------------
// Principal values

enum class PvMethod {
  /// Integrate the symmetrised integrand g(c+h)+g(c-h) from h = 0: the exact excision limit.
  Folded,
  /// Excise (c-eps, c+eps) for eps_k = eps0 2^{-k}, k = 0..6, and Richardson-extrapolate.
  ExcisionRichardson,
};

struct PvOptions {
  /// Behaviour g(c+h)+g(c-h) ~ h^fold_exponent as h -> 0 (must exceed -1).
  double fold_exponent = 0.0;
  /// Half width of the symmetric window; 0 selects the largest window inside [a,b].
  double half_width = 0.0;
  PvMethod method = PvMethod::Folded;
  /// Decay exponent of g when the upper limit is infinite.
  double tail_decay = 0.0;
  /// Extra breakpoints (in y) for the parts outside the window.
  std::vector<double> breakpoints{};
  /// Below h_model = model_fraction * half_width the folded integrand is replaced by
  /// h^fold_exponent times the linear extrapolant of fold/h^fold_exponent from
  /// h_model and 2 h_model; avoids cancellation when fold_exponent is close to -1.
  double model_fraction = 1e-5;
  /// First excision radius for ExcisionRichardson, as a fraction of the half width.
  double excision_fraction = 0.125;
};

/// Cauchy principal value of the integral of g over [a,b] (b may be +inf) with an
/// isolated non-integrable singularity at c in (a,b). Here g receives the signed
/// offset d = y - c, so that the caller can evaluate the singular factor without
/// cancellation.
template <typename G>
QuadratureResult integrate_pv_offset(const G& g, double a, double b, double c,
                                     const QuadratureSpec& spec, const PvOptions& opt = {}) {
  spec.validate();
  if (!(c > a) || !(std::isinf(b) || c < b)) {
    throw std::invalid_argument("integrate_pv: singular point must lie inside (a,b)");
  }
  if (!(opt.fold_exponent > -1.0)) {
    throw std::invalid_argument("integrate_pv: folded integrand must be integrable");
  }
  const double room = std::isinf(b) ? (c - a) : std::min(c - a, b - c);
  const double delta = opt.half_width > 0.0 ? std::min(opt.half_width, room) : room;
  const double beta = opt.fold_exponent;
  auto fold = [&](double h) { return g(h) + g(-h); };

  QuadratureResult total{};
  auto add = [&total](const QuadratureResult& r) {
    total.value += r.value;
    total.error_estimate += r.error_estimate;
    total.subdivisions_used += r.subdivisions_used;
    total.converged = total.converged && r.converged;
  };

  // Parts outside the window, in offset coordinates.
  std::vector<double> left_bp, right_bp;
  for (double p : opt.breakpoints) {
    if (p > a && p < c - delta) left_bp.push_back(p - c);
    if (p > c + delta) right_bp.push_back(p - c);
  }
  if (c - delta > a) {
    add(integrate_segments(g, make_segments(a - c, -delta, left_bp, {spec.endpoint_exponents.left, 0.0}),
                           spec));
  }
  if (std::isinf(b)) {
    add(integrate_segments(g, make_segments(delta, b, right_bp, {}, opt.tail_decay), spec));
  } else if (c + delta < b) {
    add(integrate_segments(g, make_segments(delta, b - c, right_bp, {0.0, spec.endpoint_exponents.right}),
                           spec));
  }

  if (opt.method == PvMethod::Folded) {
    const double h1 = opt.model_fraction * delta;
    const double f1 = fold(h1) / std::pow(h1, beta);
    const double f2 = fold(2.0 * h1) / std::pow(2.0 * h1, beta);
    const double slope = (f2 - f1) / h1;
    // Model region [0, h1] in closed form: int h^beta (f1 + slope (h - h1)) dh.
    const double b1 = 1.0 + beta;
    const double hb = std::pow(h1, b1);
    const double model = f1 * hb / b1 + slope * (hb * h1 / (b1 + 1.0) - hb * h1 / b1);
    total.value += model;
    std::vector<double> fold_bp;
    for (double h = 4.0 * h1; h < delta; h *= 4.0) fold_bp.push_back(h);
    add(integrate_segments(fold, make_segments(h1, delta, fold_bp, {}), spec));
    return total;
  }

  // I(eps) = I0 + c1 eps^q + c2 eps^{q+1} + ... with q = 1 + fold_exponent.
  const double q = 1.0 + beta;
  const double eps0 = opt.excision_fraction * delta;
  std::array<double, 7> values{};
  auto shell = integrate_segments(fold, std::vector<Segment>{Segment::linear(eps0, delta)}, spec);
  add(shell);
  for (int k = 1; k < 7; ++k) {
    const double hi = eps0 * std::ldexp(1.0, -(k - 1));
    auto r = integrate_segments(fold, std::vector<Segment>{Segment::linear(0.5 * hi, hi)}, spec);
    values[k] = values[k - 1] + r.value;
    total.error_estimate += r.error_estimate;
    total.converged = total.converged && r.converged;
    total.subdivisions_used += r.subdivisions_used;
  }
  // Two elimination sweeps on the three smallest excision radii.
  auto eliminate = [](double fine, double coarse, double exponent) {
    const double ratio = std::pow(2.0, exponent);
    return (ratio * fine - coarse) / (ratio - 1.0);
  };
  const double r1a = eliminate(values[5], values[4], q);
  const double r1b = eliminate(values[6], values[5], q);
  const double r2 = eliminate(r1b, r1a, q + 1.0);
  const double extrapolation_error = std::abs(r2 - r1b);
  total.value += r2;
  total.error_estimate += extrapolation_error;
  if (extrapolation_error > std::max(spec.abs_tol, spec.rel_tol * std::abs(total.value))) {
    total.converged = false;
  }
  return total;
}

/// Principal value with the integrand given as a function of y.
template <typename G>
QuadratureResult integrate_pv(const G& g, double a, double b, double c, const QuadratureSpec& spec,
                              const PvOptions& opt = {}) {
  return integrate_pv_offset([&](double d) { return g(c + d); }, a, b, c, spec, opt);
}

/// Radial principal value over (0, inf) with the singular shell at `singular_point`.
template <typename G>
QuadratureResult integrate_pv_radial(const G& g_offset, double singular_point, const QuadratureSpec& spec,
                                     PvOptions opt = {}) {
  if (!(opt.tail_decay > 1.0)) throw std::invalid_argument("integrate_pv_radial: tail decay must exceed 1");
  return integrate_pv_offset(g_offset, 0.0, std::numeric_limits<double>::infinity(), singular_point, spec, opt);
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes (Newton on the Legendre recurrence)

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

// ---------------------------------------------------------------------------
// Upper unit half-sphere S^+ in R^{N+1}, polar angle phi measured from the t-axis
// so that sigma_{N+1} = cos(phi) and |x| = sin(phi).

/// Area of the unit sphere S^{n-1} in R^n.
inline double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

/// Vector-valued integral over S^+ of sigma_{N+1}^{weight_exponent} h(c, sn) for axially
/// symmetric h, where c = cos(phi) = sigma_{N+1} and sn = sin(phi) = |x| on the unit sphere.
/// The quadrature variable is the angle from the equator, so c is exact near t = 0.
/// `edge_exponent` declares the behaviour of the full integrand at the equator;
/// `breakpoints` are given in phi.
template <std::size_t K, typename H>
VectorResult<K> integrate_half_sphere_vec(const H& h, double weight_exponent, int N,
                                          const QuadratureSpec& spec, double edge_exponent,
                                          std::vector<double> breakpoints = {}) {
  const double area = sphere_area(N);
  auto integrand = [&](double psi) {
    const double c = std::sin(psi);
    const double sn = std::cos(psi);
    const double w = (weight_exponent == 0.0 ? 1.0 : std::pow(c, weight_exponent)) *
                     (N == 1 ? 1.0 : std::pow(sn, N - 1));
    std::array<double, K> v = h(c, sn);
    for (auto& e : v) e *= w;
    return v;
  };
  QuadratureSpec local = spec.with_exponents(edge_exponent, 0.0);
  local.abs_tol = spec.abs_tol / area;
  std::vector<double> psi_bp;
  for (double phi : breakpoints) psi_bp.push_back(0.5 * std::numbers::pi - phi);
  auto segs = make_segments(0.0, 0.5 * std::numbers::pi, std::move(psi_bp), local.endpoint_exponents);
  auto r = integrate_segments_vec<K>(integrand, segs, local);
  for (std::size_t k = 0; k < K; ++k) {
    r.value[k] *= area;
    r.error_estimate[k] *= area;
  }
  return r;
}

/// Scalar form; h(c, sn) as above. The equatorial exponent defaults to the weight exponent.
template <typename H>
QuadratureResult integrate_half_sphere(const H& h, double weight_exponent, int N,
                                       const QuadratureSpec& spec,
                                       std::optional<double> edge_exponent = std::nullopt) {
  auto r = integrate_half_sphere_vec<1>(
      [&](double c, double sn) { return std::array<double, 1>{h(c, sn)}; }, weight_exponent, N, spec,
      edge_exponent.value_or(weight_exponent));
  return {r.value[0], r.error_estimate[0], r.subdivisions_used, r.converged};
}

/// Tensor-product rule over the full half-sphere for integrands that are not axially
/// symmetric. h receives the point sigma in R^{N+1} (last coordinate = t-component).
/// Hyperspherical angles with Gauss-Legendre in each; the error estimate compares
/// orders n and n/2.
inline QuadratureResult integrate_half_sphere_product(
    const std::function<double(const std::vector<double>&)>& h, double weight_exponent, int N,
    int order = 24) {
  auto run = [&](int n) {
    const GaussRule g = gauss_legendre(n);
    std::vector<double> point(N + 1, 0.0);
    // Recursive integration over S^{m} embedded in the first m+1 coordinates.
    std::function<double(int, double)> sphere = [&](int m, double radius) -> double {
      // integrates over S^m of radius `radius` (coordinates 0..m), returns sum with measure.
      if (m == 0) {
        point[0] = radius;
        double v = h(point);
        point[0] = -radius;
        v += h(point);
        return v;
      }
      if (m == 1) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
          const double ang = std::numbers::pi * (g.nodes[i] + 1.0);
          point[0] = radius * std::cos(ang);
          point[1] = radius * std::sin(ang);
          acc += std::numbers::pi * g.weights[i] * h(point);
        }
        return acc;
      }
      double acc = 0.0;
      for (int i = 0; i < n; ++i) {
        const double th = 0.5 * std::numbers::pi * (g.nodes[i] + 1.0);
        point[m] = radius * std::cos(th);
        acc += 0.5 * std::numbers::pi * g.weights[i] * std::pow(std::sin(th), m - 1) *
               sphere(m - 1, radius * std::sin(th));
      }
      return acc;
    };
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double phi = 0.25 * std::numbers::pi * (g.nodes[i] + 1.0);
      const double c = std::cos(phi);
      point[N] = c;
      const double inner = sphere(N - 1, std::sin(phi));
      acc += 0.25 * std::numbers::pi * g.weights[i] * std::pow(c, weight_exponent) *
             std::pow(std::sin(phi), N - 1) * inner;
    }
    return acc;
  };
  const double fine = run(order);
  const double coarse = run(std::max(2, order / 2));
  return {fine, std::abs(fine - coarse), 0, true};
}

}  // namespace frachenon::quadrature
