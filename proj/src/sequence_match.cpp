#include "minerva/sequence_match.hpp"

#include <algorithm>
#include <array>
#include <tuple>

namespace minerva {

namespace {

class Matcher {
 public:
  Matcher(std::string_view a, std::string_view b) : a_(a), b_(b) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      b2j_[static_cast<unsigned char>(b[j])].push_back(j);
    }
    const std::size_t n = b.size();
    if (n >= 200) {
      const std::size_t ntest = n / 100 + 1;
      for (auto& idx : b2j_) {
        if (idx.size() > ntest) idx.clear();
      }
    }
  }

  MatchingBlock longest(std::size_t alo, std::size_t ahi, std::size_t blo, std::size_t bhi) const {
    std::size_t besti = alo, bestj = blo, bestsize = 0;
    // Dense replacement for difflib's j2len dict: run lengths ending at b[j]
    // for the previous and current row of a; untouched entries stay zero.
    prev_.assign(b_.size(), 0);
    cur_.assign(b_.size(), 0);
    std::vector<std::size_t> prev_touched, cur_touched;
    for (std::size_t i = alo; i < ahi; ++i) {
      for (std::size_t j : b2j_[static_cast<unsigned char>(a_[i])]) {
        if (j < blo) continue;
        if (j >= bhi) break;
        const std::size_t k = (j > 0 ? prev_[j - 1] : 0) + 1;
        cur_[j] = k;
        cur_touched.push_back(j);
        if (k > bestsize) {
          besti = i + 1 - k;
          bestj = j + 1 - k;
          bestsize = k;
        }
      }
      for (std::size_t j : prev_touched) prev_[j] = 0;
      std::swap(prev_, cur_);
      std::swap(prev_touched, cur_touched);
      cur_touched.clear();
    }
    // No junk predicate, so only the non-junk extension passes apply; they
    // let popular elements grow an existing match.
    while (besti > alo && bestj > blo && a_[besti - 1] == b_[bestj - 1]) {
      --besti;
      --bestj;
      ++bestsize;
    }
    while (besti + bestsize < ahi && bestj + bestsize < bhi &&
           a_[besti + bestsize] == b_[bestj + bestsize]) {
      ++bestsize;
    }
    return {besti, bestj, bestsize};
  }

  std::vector<MatchingBlock> blocks() const {
    std::vector<MatchingBlock> out;
    std::vector<std::array<std::size_t, 4>> queue{{0, a_.size(), 0, b_.size()}};
    while (!queue.empty()) {
      const auto [alo, ahi, blo, bhi] = queue.back();
      queue.pop_back();
      const MatchingBlock m = longest(alo, ahi, blo, bhi);
      if (m.size == 0) continue;
      out.push_back(m);
      if (alo < m.a && blo < m.b) queue.push_back({alo, m.a, blo, m.b});
      if (m.a + m.size < ahi && m.b + m.size < bhi) {
        queue.push_back({m.a + m.size, ahi, m.b + m.size, bhi});
      }
    }
    std::sort(out.begin(), out.end(), [](const MatchingBlock& x, const MatchingBlock& y) {
      return std::tie(x.a, x.b, x.size) < std::tie(y.a, y.b, y.size);
    });
    std::vector<MatchingBlock> merged;
    for (const MatchingBlock& m : out) {
      if (!merged.empty()) {
        MatchingBlock& last = merged.back();
        if (last.a + last.size == m.a && last.b + last.size == m.b) {
          last.size += m.size;
          continue;
        }
      }
      merged.push_back(m);
    }
    return merged;
  }

 private:
  std::string_view a_;
  std::string_view b_;
  std::array<std::vector<std::size_t>, 256> b2j_;
  mutable std::vector<std::size_t> prev_;
  mutable std::vector<std::size_t> cur_;
};

}  // namespace

std::vector<MatchingBlock> matching_blocks(std::string_view a, std::string_view b) {
  return Matcher(a, b).blocks();
}

double sequence_ratio(std::string_view a, std::string_view b) {
  const std::size_t total = a.size() + b.size();
  if (total == 0) return 1.0;
  std::size_t matches = 0;
  for (const MatchingBlock& m : matching_blocks(a, b)) matches += m.size;
  return 2.0 * static_cast<double>(matches) / static_cast<double>(total);
}

}  // namespace minerva
