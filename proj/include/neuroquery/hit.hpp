#pragma once

#include <string>
#include <vector>

namespace neuroquery {

/// A ranked document.
struct ScoredHit {
  std::string doc_key;
  double score;
};

/// Sorts by score descending, then doc_key ascending.
void sort_hits(std::vector<ScoredHit>& hits);

}  // namespace neuroquery
