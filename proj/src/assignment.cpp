#include "routing/assignment.hpp"

#include <algorithm>
#include <map>

namespace routing {

StageAssignment::StageAssignment(std::vector<AssignmentPiece> pieces) {
  std::map<PathId, IntervalSet> by_path;
  for (auto& piece : pieces) {
    if (piece.path < 0) throw EngineError("assignment references a negative path id");
    if (piece.cars.is_empty()) continue;
    auto [it, fresh] = by_path.emplace(piece.path, piece.cars);
    if (!fresh) it->second = it->second.unite(piece.cars);
  }

  Rational total(0);
  IntervalSet seen = IntervalSet::empty();
  for (auto& [path, cars] : by_path) {
    if (!cars.disjoint_from(seen)) {
      throw EngineError("assignment pieces overlap");
    }
    seen = seen.unite(cars);
    total += cars.measure();
    pieces_.push_back({std::move(cars), path});
  }
  if (total != 1) throw EngineError("assignment pieces must cover [0,1) exactly");
}

StageAssignment StageAssignment::single_path(PathId path) {
  return StageAssignment({{IntervalSet::full(), path}});
}

StageAssignment StageAssignment::split(const IntervalSet& to, PathId path_to, PathId path_rest) {
  return StageAssignment({{to, path_to}, {to.complement(), path_rest}});
}

Rational StageAssignment::path_measure(PathId path) const {
  for (const auto& piece : pieces_) {
    if (piece.path == path) return piece.cars.measure();
  }
  return Rational(0);
}

IntervalSet StageAssignment::preimage(PathId path) const {
  for (const auto& piece : pieces_) {
    if (piece.path == path) return piece.cars;
  }
  return IntervalSet::empty();
}

StageAssignment StageAssignment::override_subset(
    const IntervalSet& subset, const std::vector<AssignmentPiece>& replacement) const {
  IntervalSet covered = IntervalSet::empty();
  Rational covered_measure(0);
  std::vector<AssignmentPiece> next;
  for (const auto& piece : replacement) {
    if (!piece.cars.disjoint_from(covered)) throw EngineError("assignment pieces overlap");
    covered = covered.unite(piece.cars);
    covered_measure += piece.cars.measure();
    next.push_back(piece);
  }
  if (!(covered.intersect(subset) == covered) || covered_measure != subset.measure()) {
    throw EngineError("override must cover exactly the rerouted subset");
  }
  for (const auto& piece : pieces_) {
    next.push_back({piece.cars.subtract(subset), piece.path});
  }
  return StageAssignment(std::move(next));
}

bool StageAssignment::operator==(const StageAssignment& other) const {
  if (pieces_.size() != other.pieces_.size()) return false;
  for (size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i].path != other.pieces_[i].path) return false;
    if (!(pieces_[i].cars == other.pieces_[i].cars)) return false;
  }
  return true;
}

}  // namespace routing
