#include "subeq/profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "subeq/errors.hpp"

namespace subeq {

namespace {

std::vector<double> sample_points(const std::vector<double>& knots) {
  std::vector<double> pts;
  for (int i = -2000; i <= 2000; ++i) pts.push_back(i * 0.005);
  for (double big : {20.0, 50.0, 100.0, 1e3, 1e4}) {
    pts.push_back(big);
    pts.push_back(-big);
  }
  for (double e : {1e-3, 1e-4, 1e-6, 1e-9}) {
    pts.push_back(e);
    pts.push_back(-e);
  }
  for (double k : knots) {
    pts.push_back(k);
    pts.push_back(-k);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// Fritsch-Carlson slopes: monotone data gives a monotone interpolant.
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  if (n == 2) {
    d[0] = d[1] = delta[0];
    return d;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0) {
      d[i] = 0;
    } else {
      const double w1 = 2 * h[i] + h[i - 1], w2 = h[i] + 2 * h[i - 1];
      d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s * d0 <= 0) s = 0;
    else if (d0 * d1 <= 0 && std::abs(s) > 3 * std::abs(d0)) s = 3 * d0;
    return s;
  };
  d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  return d;
}

}  // namespace

Profile Profile::linear(double slope) {
  if (!std::isfinite(slope)) throw InputError("profile slope must be finite");
  Profile p;
  p.kind_ = Kind::Linear;
  p.a_ = slope;
  p.compute_flags();
  return p;
}

Profile Profile::constant(double c) {
  if (!std::isfinite(c)) throw InputError("profile constant must be finite");
  Profile p;
  p.kind_ = Kind::Constant;
  p.a_ = c;
  p.compute_flags();
  return p;
}

Profile Profile::tabulated(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw InputError("tabulated profile needs >= 2 (x, y) pairs");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw InputError("tabulated profile has a non-finite entry");
    if (i > 0 && !(xs[i] > xs[i - 1])) throw InputError("tabulated profile knots must be strictly increasing");
  }
  Profile p;
  p.kind_ = Kind::Tabulated;
  p.xs_ = std::move(xs);
  p.ys_ = std::move(ys);
  p.slopes_ = pchip_slopes(p.xs_, p.ys_);
  p.compute_flags();
  return p;
}

double Profile::operator()(double r) const {
  switch (kind_) {
    case Kind::Linear: return a_ * r;
    case Kind::Constant: return a_;
    case Kind::Tabulated: break;
  }
  if (std::isnan(r)) return r;
  if (r <= xs_.front()) return ys_.front();
  if (r >= xs_.back()) return ys_.back();
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
  const double h = xs_[i + 1] - xs_[i];
  const double s = (r - xs_[i]) / h;
  const double u = 1 - s;
  // factored Hermite basis keeps the interpolant exact at the knots
  return u * u * ((1 + 2 * s) * ys_[i] + s * h * slopes_[i]) + s * s * ((3 - 2 * s) * ys_[i + 1] - u * h * slopes_[i + 1]);
}

double Profile::derivative(double r) const {
  switch (kind_) {
    case Kind::Linear: return a_;
    case Kind::Constant: return 0.0;
    case Kind::Tabulated: break;
  }
  if (r <= xs_.front() || r >= xs_.back()) return 0.0;
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
  const double h = xs_[i + 1] - xs_[i];
  const double s = (r - xs_[i]) / h;
  const double dy = (ys_[i + 1] - ys_[i]) / h;
  return 6 * s * (1 - s) * dy + (1 - s) * (1 - 3 * s) * slopes_[i] + s * (3 * s - 2) * slopes_[i + 1];
}

Profile Profile::reflected() const {
  switch (kind_) {
    case Kind::Linear: return linear(a_);
    case Kind::Constant: return constant(-a_);
    case Kind::Tabulated: break;
  }
  std::vector<double> xs(xs_.size()), ys(ys_.size());
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    xs[i] = -xs_[xs_.size() - 1 - i];
    ys[i] = -ys_[ys_.size() - 1 - i];
  }
  return tabulated(std::move(xs), std::move(ys));
}

void Profile::compute_flags() {
  const std::vector<double> pts = sample_points(xs_);
  std::vector<double> v(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) v[i] = (*this)(pts[i]);
  bool nd = true, si = true, ni = true, nonneg = true;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (v[i] < 0) nonneg = false;
    if (i == 0) continue;
    if (v[i] < v[i - 1]) nd = false;
    if (!(v[i] > v[i - 1])) si = false;
    if (v[i] > v[i - 1]) ni = false;
  }
  const double at0 = (*this)(0.0);
  bool negative_left = true, positive_left = true, positive_all = true;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i] < 0 && !(v[i] < 0)) negative_left = false;
    if (pts[i] < 0 && !(v[i] > 0)) positive_left = false;
    if (!(v[i] > 0)) positive_all = false;
  }
  flags_.non_decreasing = nd;
  flags_.strictly_increasing = si;
  flags_.non_increasing = ni;
  flags_.nonnegative = nonneg;
  flags_.f1 = nd && at0 == 0.0 && negative_left;
  // monotone with f(-mu) = f(0) = 0 forces f = 0 on [-mu, 0]
  flags_.f1_prime = nd && at0 == 0.0 && (*this)(-1e-3) == 0.0;
  flags_.xi1 = ni && nonneg && at0 == 0.0 && positive_left;
  flags_.xi0 = ni && positive_all;
}

std::string Profile::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::Linear: os << "linear(" << a_ << ")"; break;
    case Kind::Constant: os << "constant(" << a_ << ")"; break;
    case Kind::Tabulated: os << "tabulated(" << xs_.size() << " knots)"; break;
  }
  return os.str();
}

}  // namespace subeq
