#pragma once

#include <cmath>

#include "cmc/geometry.hpp"

namespace cmc {

// Displacement and its derivatives at one node.
template <class T>
struct LocalJet {
  T u{}, ut{}, us{}, utt{}, uts{}, uss{};
};

namespace detail {

template <class T>
struct V3 {
  T x{}, y{}, z{};
};

template <class T>
T dot(const V3<T>& a, const V3<T>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <class T>
V3<T> cross(const V3<T>& a, const V3<T>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// Derivatives of X = phi + u Z expressed in the right-handed orthonormal
// frame (e_x, e_theta, N) of the reference cylinder at the node, where
// e_theta' = N and N' = -e_theta.
template <class T>
struct GraphFrameDerivatives {
  V3<T> xt, xs, xtt, xts, xss;
};

template <class T>
GraphFrameDerivatives<T> frame_derivatives(const LocalJet<T>& j, double r, const TiltProfile& z) {
  const double f = z.f;
  const double fp = z.df;
  const double fpp = z.d2f;
  GraphFrameDerivatives<T> d;
  d.xt = {T(1.0), j.ut * f, j.ut};
  d.xs = {T(0.0), r + j.us * f + j.u * (fp - 1.0), j.us + j.u * f};
  d.xtt = {T(0.0), j.utt * f, j.utt};
  d.xts = {T(0.0), j.uts * f + j.ut * (fp - 1.0), j.uts + j.ut * f};
  d.xss = {T(0.0), j.uss * f + 2.0 * j.us * (fp - 1.0) + j.u * (fpp - f),
           r + j.uss + 2.0 * j.us * f + j.u * (2.0 * fp - 1.0)};
  return d;
}

}  // namespace detail

// First fundamental form determinant; the caller rejects values <= 0.
template <class T>
T graph_metric_determinant(const LocalJet<T>& j, double r, const TiltProfile& z) {
  const auto d = detail::frame_derivatives(j, r, z);
  const T e = detail::dot(d.xt, d.xt);
  const T f = detail::dot(d.xt, d.xs);
  const T g = detail::dot(d.xs, d.xs);
  return e * g - f * f;
}

// H = (E n - 2 F m + G l) / (2 (E G - F^2)) with the normal oriented along N.
template <class T>
T graph_mean_curvature(const LocalJet<T>& j, double r, const TiltProfile& z) {
  using std::sqrt;
  const auto d = detail::frame_derivatives(j, r, z);
  const T e = detail::dot(d.xt, d.xt);
  const T f = detail::dot(d.xt, d.xs);
  const T g = detail::dot(d.xs, d.xs);
  const auto c = detail::cross(d.xt, d.xs);
  const T w = sqrt(detail::dot(c, c));
  const T l = detail::dot(d.xtt, c) / w;
  const T m = detail::dot(d.xts, c) / w;
  const T n = detail::dot(d.xss, c) / w;
  return (e * n - 2.0 * f * m + g * l) / (2.0 * (e * g - f * f));
}

// <n, N_tilde> for the unit graph normal n and the support-plane normal
// N_tilde = sin(gamma) e_theta + cos(gamma) N at the Gamma_2 node.
template <class T>
T graph_contact_cosine(const LocalJet<T>& j, double r, const TiltProfile& z, double sin_gamma,
                       double cos_gamma) {
  using std::sqrt;
  const auto d = detail::frame_derivatives(j, r, z);
  const auto c = detail::cross(d.xt, d.xs);
  const T w = sqrt(detail::dot(c, c));
  return (c.y * sin_gamma + c.z * cos_gamma) / w;
}

}  // namespace cmc
