#include "brwre/point_measure.hpp"

#include <algorithm>

#include "brwre/errors.hpp"

namespace brwre {

void PointMeasure::add(double location, std::uint64_t multiplicity) {
  if (location == 0.0 || multiplicity == 0) return;
  atoms_.push_back({location, multiplicity});
}

void PointMeasure::canonicalize() {
  std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.location > b.location; });
  std::vector<Atom> merged;
  merged.reserve(atoms_.size());
  for (const Atom& atom : atoms_) {
    if (!merged.empty() && merged.back().location == atom.location) merged.back().multiplicity += atom.multiplicity;
    else merged.push_back(atom);
  }
  atoms_ = std::move(merged);
}

std::uint64_t PointMeasure::total_mass() const noexcept {
  std::uint64_t total = 0;
  for (const Atom& atom : atoms_) total += atom.multiplicity;
  return total;
}

std::uint64_t PointMeasure::count_above(double x) const noexcept {
  std::uint64_t total = 0;
  for (const Atom& atom : atoms_)
    if (atom.location > x) total += atom.multiplicity;
  return total;
}

std::uint64_t PointMeasure::count_below(double neg_y) const noexcept {
  std::uint64_t total = 0;
  for (const Atom& atom : atoms_)
    if (atom.location < neg_y) total += atom.multiplicity;
  return total;
}

PointMeasure PointMeasure::scaled(double s) const {
  require(s > 0.0, "scale factor must be positive");
  PointMeasure out;
  for (const Atom& atom : atoms_) out.add(atom.location * s, atom.multiplicity);
  out.canonicalize();
  return out;
}

}  // namespace brwre
