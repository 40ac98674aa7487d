#pragma once

// Geometric domains and the midpoint quadrature grids laid over them.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "spectral_bounds/error.hpp"
#include "spectral_bounds/expr.hpp"
#include "spectral_bounds/lattice.hpp"
#include "spectral_bounds/special_functions.hpp"

namespace spectral_bounds {

struct BoxDomain {
  std::vector<double> lengths;
  std::vector<double> offset;  // lower corner; empty means the origin
};

/// Euclidean ball (a disk for ν = 2).
struct DiskDomain {
  double radius = 1.0;
  std::vector<double> center;
};

/// Box restricted to {inside(x) >= 0}.
struct MaskedBoxDomain {
  BoxDomain box;
  Expr inside;
};

/// Fundamental domain of a planar lattice; functions on it are periodic.
struct TorusDomain {
  Lattice2 lattice;
};

class Domain {
 public:
  using Variant = std::variant<BoxDomain, DiskDomain, MaskedBoxDomain, TorusDomain>;

  static Domain box(std::vector<double> lengths, std::vector<double> offset = {}) {
    return Domain(BoxDomain{std::move(lengths), std::move(offset)});
  }
  static Domain disk(double radius, std::vector<double> center) {
    return Domain(DiskDomain{radius, std::move(center)});
  }
  static Domain masked_box(std::vector<double> lengths, std::vector<double> offset, Expr inside) {
    return Domain(MaskedBoxDomain{BoxDomain{std::move(lengths), std::move(offset)}, std::move(inside)});
  }
  static Domain torus(Lattice2 lattice) { return Domain(TorusDomain{lattice}); }

  explicit Domain(Variant v) : v_(std::move(v)) { validate(); }

  const Variant& variant() const { return v_; }
  int dimension() const { return dim_; }
  bool is_periodic() const { return std::holds_alternative<TorusDomain>(v_); }

  std::string type_name() const {
    switch (v_.index()) {
      case 0: return "box";
      case 1: return "disk";
      case 2: return "masked_box";
      default: return "torus";
    }
  }

  /// Lower corner and edge vectors of the parallelepiped the grid is laid on.
  /// For everything but a skew torus the edges are axis-aligned.
  std::vector<double> frame_origin() const {
    if (auto* b = std::get_if<BoxDomain>(&v_)) return offset_or_zero(*b);
    if (auto* m = std::get_if<MaskedBoxDomain>(&v_)) return offset_or_zero(m->box);
    if (auto* d = std::get_if<DiskDomain>(&v_)) {
      std::vector<double> o(dim_);
      for (int i = 0; i < dim_; ++i) o[i] = center_of(*d)[i] - d->radius;
      return o;
    }
    return {0.0, 0.0};
  }

  /// Column `axis` of the frame matrix.
  std::vector<double> frame_edge(int axis) const {
    std::vector<double> e(dim_, 0.0);
    if (auto* b = std::get_if<BoxDomain>(&v_)) {
      e[axis] = b->lengths[axis];
    } else if (auto* m = std::get_if<MaskedBoxDomain>(&v_)) {
      e[axis] = m->box.lengths[axis];
    } else if (auto* d = std::get_if<DiskDomain>(&v_)) {
      e[axis] = 2.0 * d->radius;
    } else {
      const auto& t = std::get<TorusDomain>(v_);
      const Vec2& v = axis == 0 ? t.lattice.e1() : t.lattice.e2();
      e = {v[0], v[1]};
    }
    return e;
  }

  bool frame_is_axis_aligned() const {
    if (auto* t = std::get_if<TorusDomain>(&v_)) {
      return t->lattice.e1()[1] == 0.0 && t->lattice.e2()[0] == 0.0;
    }
    return true;
  }

  /// Membership test for points inside the frame.
  bool contains(std::span<const double> x) const {
    if (auto* d = std::get_if<DiskDomain>(&v_)) {
      const auto c = center_of(*d);
      double r2 = 0.0;
      for (int i = 0; i < dim_; ++i) r2 += (x[i] - c[i]) * (x[i] - c[i]);
      return r2 < d->radius * d->radius;
    }
    if (auto* m = std::get_if<MaskedBoxDomain>(&v_)) {
      const double v = m->inside.evaluate_unchecked(x);
      return std::isfinite(v) && v >= 0.0;
    }
    return true;
  }

  /// Exact volume for box, ball and torus; midpoint quadrature for masked boxes.
  double volume() const;

 private:
  static std::vector<double> offset_or_zero(const BoxDomain& b) {
    return b.offset.empty() ? std::vector<double>(b.lengths.size(), 0.0) : b.offset;
  }
  std::vector<double> center_of(const DiskDomain& d) const {
    return d.center.empty() ? std::vector<double>(dim_, 0.0) : d.center;
  }

  void validate_box(const BoxDomain& b) {
    if (b.lengths.empty()) throw InvalidInput("box domain needs at least one side length");
    for (double l : b.lengths)
      if (!(l > 0.0) || !std::isfinite(l)) throw InvalidInput("box side lengths must be positive");
    if (!b.offset.empty() && b.offset.size() != b.lengths.size())
      throw InvalidInput("box offset dimension does not match side lengths");
    dim_ = static_cast<int>(b.lengths.size());
  }

  void validate() {
    if (auto* b = std::get_if<BoxDomain>(&v_)) {
      validate_box(*b);
    } else if (auto* m = std::get_if<MaskedBoxDomain>(&v_)) {
      validate_box(m->box);
      if (m->inside.max_variable() >= dim_)
        throw InvalidInput("mask predicate references a coordinate beyond the box dimension");
    } else if (auto* d = std::get_if<DiskDomain>(&v_)) {
      if (!(d->radius > 0.0) || !std::isfinite(d->radius)) throw InvalidInput("disk radius must be positive");
      dim_ = d->center.empty() ? 2 : static_cast<int>(d->center.size());
    } else {
      dim_ = 2;
    }
  }

  Variant v_;
  int dim_ = 0;
};

/// Midpoint grid over a domain frame: node (i_0, ..., i_{ν-1}) sits at
/// origin + Σ_a (i_a + 1/2)/n_a · edge_a. Axis 0 varies fastest.
class QuadratureGrid {
 public:
  QuadratureGrid(const Domain& domain, std::vector<int> counts)
      : counts_(std::move(counts)), origin_(domain.frame_origin()), periodic_(domain.is_periodic()) {
    const int nu = domain.dimension();
    if (static_cast<int>(counts_.size()) != nu)
      throw InvalidInput("grid dimension does not match domain dimension");
    for (int c : counts_)
      if (c < 1) throw InvalidInput("grid node counts must be positive");
    edges_.resize(nu);
    for (int a = 0; a < nu; ++a) edges_[a] = domain.frame_edge(a);
    // |det| of the frame matrix divided by the node count.
    cell_volume_ = std::fabs(frame_det()) /
                   std::accumulate(counts_.begin(), counts_.end(), 1.0, std::multiplies<>());
    std::size_t total = 1;
    for (int c : counts_) total *= static_cast<std::size_t>(c);
    inside_.assign(total, 1);
    std::vector<double> x(nu);
    inside_count_ = 0;
    for (std::size_t i = 0; i < total; ++i) {
      node(i, x);
      inside_[i] = domain.contains(x) ? 1 : 0;
      inside_count_ += inside_[i];
    }
    if (inside_count_ == 0) throw InvalidInput("grid has no node inside the domain");
  }

  /// Uniform grid with n nodes per axis.
  static QuadratureGrid uniform(const Domain& domain, int n) {
    return QuadratureGrid(domain, std::vector<int>(domain.dimension(), n));
  }

  int dimension() const { return static_cast<int>(counts_.size()); }
  const std::vector<int>& counts() const { return counts_; }
  std::size_t size() const { return inside_.size(); }
  std::size_t inside_count() const { return inside_count_; }
  bool inside(std::size_t i) const { return inside_[i] != 0; }
  bool periodic() const { return periodic_; }
  double cell_volume() const { return cell_volume_; }
  double weight(std::size_t i) const { return inside_[i] ? cell_volume_ : 0.0; }

  /// Node spacing along axis a (length of the edge divided by the count).
  double spacing(int a) const {
    double s = 0.0;
    for (double v : edges_[a]) s += v * v;
    return std::sqrt(s) / counts_[a];
  }

  /// Multi-index of the flat node index.
  void index(std::size_t flat, std::span<int> idx) const {
    for (std::size_t a = 0; a < counts_.size(); ++a) {
      idx[a] = static_cast<int>(flat % counts_[a]);
      flat /= counts_[a];
    }
  }

  std::size_t flat(std::span<const int> idx) const {
    std::size_t f = 0;
    for (std::size_t a = counts_.size(); a-- > 0;) f = f * counts_[a] + idx[a];
    return f;
  }

  /// Physical coordinates of the point at fractional grid position `s`
  /// (node i sits at s = i + 1/2 along each axis).
  void point_at(std::span<const double> s, std::span<double> x) const {
    const std::size_t nu = counts_.size();
    for (std::size_t d = 0; d < nu; ++d) x[d] = origin_[d];
    for (std::size_t a = 0; a < nu; ++a) {
      const double f = s[a] / counts_[a];
      for (std::size_t d = 0; d < nu; ++d) x[d] += f * edges_[a][d];
    }
  }

  void node(std::size_t flat_index, std::span<double> x) const {
    const std::size_t nu = counts_.size();
    double s[8];
    for (std::size_t a = 0; a < nu; ++a) {
      s[a] = static_cast<double>(flat_index % counts_[a]) + 0.5;
      flat_index /= counts_[a];
    }
    point_at(std::span<const double>(s, nu), x);
  }

 private:
  double frame_det() const {
    const std::size_t nu = counts_.size();
    if (nu == 1) return edges_[0][0];
    if (nu == 2) return edges_[0][0] * edges_[1][1] - edges_[1][0] * edges_[0][1];
    // Axis-aligned frames in higher dimension.
    double d = 1.0;
    for (std::size_t a = 0; a < nu; ++a) d *= edges_[a][a];
    return d;
  }

  std::vector<int> counts_;
  std::vector<double> origin_;
  std::vector<std::vector<double>> edges_;
  std::vector<char> inside_;
  std::size_t inside_count_ = 0;
  double cell_volume_ = 0.0;
  bool periodic_ = false;
};

inline double Domain::volume() const {
  if (auto* b = std::get_if<BoxDomain>(&v_)) {
    double v = 1.0;
    for (double l : b->lengths) v *= l;
    return v;
  }
  if (auto* d = std::get_if<DiskDomain>(&v_)) {
    return unit_ball_volume(dim_) * std::pow(d->radius, dim_);
  }
  if (auto* t = std::get_if<TorusDomain>(&v_)) return t->lattice.covolume();
  const int n = dim_ <= 2 ? 1024 : 96;
  const QuadratureGrid g = QuadratureGrid::uniform(*this, n);
  return g.cell_volume() * static_cast<double>(g.inside_count());
}

inline double domain_volume(const Domain& d) { return d.volume(); }

/// Σ f(node)·weight / Σ weight over inside nodes. The grid's own inside volume
/// is the normaliser, so constants have mean exactly 1·c on every domain.
inline double mean_value(const Expr& f, const Domain& d, const QuadratureGrid& grid) {
  if (grid.dimension() != d.dimension()) throw InvalidInput("mean_value: grid does not match domain");
  if (f.max_variable() >= d.dimension())
    throw InvalidInput("mean_value: field references a coordinate beyond the domain dimension");
  std::vector<double> x(d.dimension());
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.inside(i)) continue;
    grid.node(i, x);
    sum += f(x);
  }
  return sum / static_cast<double>(grid.inside_count());
}

}  // namespace spectral_bounds
