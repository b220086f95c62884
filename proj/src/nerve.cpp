#include "gerbes/nerve.hpp"

namespace gerbes {

Nerve build_nerve(const GoodCover& cover, size_t max_level) {
  Nerve n;
  n.levels.resize(max_level + 1);
  for (uint32_t i = 0; i < cover.size(); ++i) n.levels[0].push_back(Tuple{i});
  for (size_t p = 1; p <= max_level; ++p) {
    for (const auto& t : n.levels[p - 1]) {
      for (uint32_t i = t.back(); i < cover.size(); ++i) {
        Tuple ext = t;
        ext.push_back(i);
        if (tuple_domain(cover, ext)) n.levels[p].push_back(std::move(ext));
      }
    }
  }
  n.nondegenerate_dim = 0;
  for (size_t p = 0; p < n.levels.size(); ++p)
    for (const auto& t : n.levels[p])
      if (!is_degenerate(t)) n.nondegenerate_dim = static_cast<int>(p);
  return n;
}

CoverContext make_context(GoodCover cover, size_t max_level) {
  Nerve n = build_nerve(cover, max_level);
  return CoverContext{std::move(cover), std::move(n)};
}

}  // namespace gerbes
