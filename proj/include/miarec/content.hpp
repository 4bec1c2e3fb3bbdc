#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "miarec/corpus.hpp"
#include "miarec/dense.hpp"

namespace miarec {

/// Lower-cased alphanumeric runs of length >= 2.
std::vector<std::string> tokenize(const std::string& text);

class Vocabulary {
 public:
  /// Keeps tokens seen at least `min_count` times, indexed in first-seen order.
  static Vocabulary build(const std::vector<std::vector<std::string>>& documents,
                          std::size_t min_count);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t min_count() const noexcept { return min_count_; }
  std::optional<std::size_t> index(const std::string& token) const;
  const std::string& token(std::size_t i) const { return tokens_.at(i); }
  std::uint64_t count(std::size_t i) const { return counts_.at(i); }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t min_count_ = 1;
};

/// Paper vectors, one row per paper id.
class DocVectors {
 public:
  DocVectors() = default;
  DocVectors(std::vector<std::string> paper_ids, Dense matrix);

  std::size_t dim() const noexcept { return matrix_.cols(); }
  std::size_t size() const noexcept { return paper_ids_.size(); }
  const Dense& matrix() const noexcept { return matrix_; }
  const std::vector<std::string>& paper_ids() const noexcept { return paper_ids_; }
  std::span<const double> vector(const std::string& paper_id) const;
  std::optional<std::size_t> index(const std::string& paper_id) const;

  /// Rows reordered to match the corpus paper order. Throws CoverageError
  /// naming the first corpus paper without a vector.
  DocVectors aligned_to(const CorpusStore& corpus) const;

  friend bool operator==(const DocVectors& a, const DocVectors& b) {
    return a.paper_ids_ == b.paper_ids_ && a.matrix_ == b.matrix_;
  }

 private:
  std::vector<std::string> paper_ids_;
  std::unordered_map<std::string, std::size_t> index_;
  Dense matrix_;
};

struct ContentConfig {
  std::size_t dim = 64;
  std::size_t epochs = 50;
  std::size_t negatives = 5;
  double learning_rate = 0.025;
  std::size_t min_count = 2;
  std::uint64_t seed = 1;
};

struct PvDbowResult {
  DocVectors vectors;
  /// Mean per-pair loss observed during each epoch.
  std::vector<double> epoch_loss;
  std::vector<std::string> untrained;  // papers with no usable tokens
};

/// Text fed to the document model: title then abstract.
std::string document_text(const PaperRecord& paper);

PvDbowResult train_pvdbow(const CorpusStore& corpus, const ContentConfig& config);

/// Negated PV-DBOW objective for one (document, word) pair and its negatives:
/// -log s(v.c_w) - sum_n log s(-v.c_n).
double pvdbow_pair_loss(std::span<const double> doc, std::span<const double> word,
                        const std::vector<std::span<const double>>& negatives);

/// Analytic gradient of pvdbow_pair_loss with respect to the document vector.
std::vector<double> pvdbow_pair_doc_gradient(std::span<const double> doc,
                                             std::span<const double> word,
                                             const std::vector<std::span<const double>>& negatives);

/// "#dim <d>" header then "<paper_id> <v_1> ... <v_d>" per line.
void save_vectors(const DocVectors& vectors, const std::string& path);
std::string format_vectors(const DocVectors& vectors);
DocVectors load_vectors(const std::string& path);
DocVectors parse_vectors(std::istream& in);
/// Loads and requires a row for every corpus paper.
DocVectors load_vectors(const std::string& path, const CorpusStore& corpus);

}  // namespace miarec
