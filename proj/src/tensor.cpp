#include "fissura/tensor.hpp"

#include <algorithm>

namespace fissura {

SymTensor2 deviatoric(const SymTensor2& t) {
  const double half_trace = 0.5 * t.trace();
  return {t.xx - half_trace, t.yy - half_trace, t.xy};
}

TraceSplit trace_split(const SymTensor2& t) {
  const double d = t.trace();
  return {std::max(d, 0.0), std::max(-d, 0.0)};
}

EigenPair2 eigen(const SymTensor2& t) {
  const double mean = 0.5 * (t.xx + t.yy);
  const double half_diff = 0.5 * (t.xx - t.yy);
  const double radius = std::hypot(half_diff, t.xy);

  EigenPair2 out;
  out.lambda1 = mean + radius;
  out.lambda2 = mean - radius;
  if (radius <= 1e-14 * t.norm()) {
    // Multiple of the identity: any basis diagonalizes it.
    out.e1 = {1.0, 0.0};
    out.e2 = {0.0, 1.0};
    return out;
  }
  const double theta = 0.5 * std::atan2(t.xy, half_diff);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  out.e1 = {c, s};
  out.e2 = {-s, c};
  return out;
}

SymTensor2 from_eigen(double l1, double l2, const Vec2& e1, const Vec2& e2) {
  return {l1 * e1.x * e1.x + l2 * e2.x * e2.x,
          l1 * e1.y * e1.y + l2 * e2.y * e2.y,
          l1 * e1.x * e1.y + l2 * e2.x * e2.y};
}

PsdSplit psd_project(const SymTensor2& t) {
  const EigenPair2 ep = eigen(t);
  if (ep.lambda2 >= 0.0) return {t, SymTensor2{}};
  if (ep.lambda1 <= 0.0) return {SymTensor2{}, t};
  // Mixed signs: lambda1 > 0 > lambda2.
  const SymTensor2 plus = from_eigen(ep.lambda1, 0.0, ep.e1, ep.e2);
  return {plus, t - plus};
}

SymTensor2 sym_rank_one(const Vec2& a, const Vec2& b) {
  return {a.x * b.x, a.y * b.y, 0.5 * (a.x * b.y + a.y * b.x)};
}

}  // namespace fissura
