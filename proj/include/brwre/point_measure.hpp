#pragma once

#include <cstdint>
#include <vector>

namespace brwre {

struct Atom {
  double location = 0.0;
  std::uint64_t multiplicity = 1;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite point measure on the punctured real line. Canonical form keeps atoms
/// sorted by decreasing location with distinct locations.
class PointMeasure {
 public:
  PointMeasure() = default;

  /// Adds mass at `location`; zero locations and zero multiplicities are dropped.
  void add(double location, std::uint64_t multiplicity = 1);
  /// Sorts and merges coinciding locations.
  void canonicalize();

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  bool empty() const noexcept { return atoms_.empty(); }
  std::size_t size() const noexcept { return atoms_.size(); }

  std::uint64_t total_mass() const noexcept;
  /// N(x, inf), counted with multiplicity.
  std::uint64_t count_above(double x) const noexcept;
  /// N(-inf, -y), counted with multiplicity.
  std::uint64_t count_below(double neg_y) const noexcept;
  /// Copy with every location multiplied by `s` > 0.
  PointMeasure scaled(double s) const;

  friend bool operator==(const PointMeasure&, const PointMeasure&) = default;

 private:
  std::vector<Atom> atoms_;
};

}  // namespace brwre
