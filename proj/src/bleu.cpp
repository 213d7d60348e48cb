#include "sead/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace sead {

namespace {

using Counts = std::unordered_map<std::string, long>;

// n-gram key with a separator that cannot occur inside tokens
Counts ngram_counts(const std::vector<std::string>& toks, int n) {
  Counts out;
  if (static_cast<int>(toks.size()) < n) return out;
  for (size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key = toks[i];
    for (int j = 1; j < n; ++j) {
      key += '\x1f';
      key += toks[i + j];
    }
    ++out[key];
  }
  return out;
}

}  // namespace

double corpus_bleu(const std::vector<std::vector<std::string>>& candidates,
                   const std::vector<std::vector<std::string>>& references,
                   int max_n) {
  if (candidates.size() != references.size())
    throw std::invalid_argument("candidate/reference count mismatch");
  if (max_n < 1) throw std::invalid_argument("max_n must be positive");
  if (candidates.empty()) return 0.0;

  std::vector<long> clipped(max_n, 0), total(max_n, 0);
  long cand_len = 0, ref_len = 0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    cand_len += static_cast<long>(candidates[i].size());
    ref_len += static_cast<long>(references[i].size());
    for (int n = 1; n <= max_n; ++n) {
      Counts c = ngram_counts(candidates[i], n);
      Counts r = ngram_counts(references[i], n);
      for (const auto& [key, count] : c) {
        total[n - 1] += count;
        auto it = r.find(key);
        if (it != r.end()) clipped[n - 1] += std::min(count, it->second);
      }
    }
  }

  if (cand_len == 0) return 0.0;
  double log_prec = 0.0;
  for (int n = 0; n < max_n; ++n) {
    if (clipped[n] == 0 || total[n] == 0) return 0.0;
    log_prec += std::log(double(clipped[n]) / double(total[n]));
  }
  log_prec /= max_n;
  double bp =
      cand_len >= ref_len ? 1.0 : std::exp(1.0 - double(ref_len) / cand_len);
  return 100.0 * bp * std::exp(log_prec);
}

}  // namespace sead
