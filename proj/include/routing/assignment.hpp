#pragma once

#include <vector>

#include "routing/interval_set.hpp"
#include "routing/network.hpp"

namespace routing {

struct AssignmentPiece {
  IntervalSet cars;
  PathId path = 0;
};

/// A planner's piecewise-constant routing of its own cars: a map from
/// [0,1) (local share coordinates) to paths. Stored normalized as one
/// merged car set per path, ascending by path id; the sets are pairwise
/// disjoint and their measures sum to exactly 1.
class StageAssignment {
 public:
  explicit StageAssignment(std::vector<AssignmentPiece> pieces);

  /// Every car on one path.
  static StageAssignment single_path(PathId path);

  /// Cars in `to` ride path_to; everyone else rides path_rest.
  static StageAssignment split(const IntervalSet& to, PathId path_to, PathId path_rest);

  const std::vector<AssignmentPiece>& pieces() const { return pieces_; }

  /// Measure of cars assigned to the path (0 if none).
  Rational path_measure(PathId path) const;

  /// The car set assigned to the path (empty if none).
  IntervalSet preimage(PathId path) const;

  /// Reroutes the cars of `subset` according to `replacement`, which must
  /// cover exactly `subset`; cars outside keep their recommendation.
  StageAssignment override_subset(const IntervalSet& subset,
                                  const std::vector<AssignmentPiece>& replacement) const;

  /// Equality as maps (normalized representation compares directly).
  bool operator==(const StageAssignment& other) const;

 private:
  std::vector<AssignmentPiece> pieces_;
};

}  // namespace routing
