#pragma once

#include <string>
#include <vector>

namespace sead {

// Corpus-level BLEU-4 with the standard brevity penalty, in [0, 100].
// Clipped n-gram counts are pooled over the whole corpus before the
// geometric mean; any order with zero clipped matches zeroes the score.
double corpus_bleu(const std::vector<std::vector<std::string>>& candidates,
                   const std::vector<std::vector<std::string>>& references,
                   int max_n = 4);

}  // namespace sead
