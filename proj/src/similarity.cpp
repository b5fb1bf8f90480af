#include "sciflow/similarity.hpp"

#include <map>
#include <optional>
#include <vector>

#include "sciflow/labels.hpp"

namespace sciflow {

Eigen::MatrixXd similarity_matrix(std::span<const Described> left, std::span<const Described> right,
                                  const EmbeddingProvider& embedder) {
  // Distinct filtered labels, embedded once.
  std::map<std::string, std::size_t> slot;
  std::vector<std::string> texts;
  auto intern = [&](const Described& d) -> std::optional<std::size_t> {
    auto filtered = filter_label(d.label);
    if (!filtered) return std::nullopt;
    auto [it, inserted] = slot.emplace(*filtered, texts.size());
    if (inserted) texts.push_back(*filtered);
    return it->second;
  };
  std::vector<std::optional<std::size_t>> lslot, rslot;
  lslot.reserve(left.size());
  rslot.reserve(right.size());
  for (const auto& d : left) lslot.push_back(intern(d));
  for (const auto& d : right) rslot.push_back(intern(d));

  const auto vectors = texts.empty() ? std::vector<Embedding>{} : embedder.embed(texts);
  std::vector<bool> usable(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) usable[i] = vectors[i].nonZeros() > 0;

  Eigen::MatrixXd sim(static_cast<Eigen::Index>(left.size()), static_cast<Eigen::Index>(right.size()));
  for (std::size_t i = 0; i < left.size(); ++i) {
    for (std::size_t j = 0; j < right.size(); ++j) {
      double s;
      if (lslot[i] && rslot[j] && usable[*lslot[i]] && usable[*rslot[j]]) {
        s = *lslot[i] == *rslot[j] ? 1.0 : rescale_cosine(cosine(vectors[*lslot[i]], vectors[*rslot[j]]));
      } else {
        s = left[i].node_type == right[j].node_type && left[i].node_type != NodeType::unknown ? 1.0 : 0.0;
      }
      sim(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s;
    }
  }
  return sim;
}

}  // namespace sciflow
