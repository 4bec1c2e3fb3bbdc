#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace miarec {

struct Author {
  std::string id;
  std::string name;
  std::optional<std::string> org;

  friend bool operator==(const Author&, const Author&) = default;
};

struct PaperRecord {
  std::string paper_id;
  std::string title;
  std::optional<std::string> abstract;
  int year = 0;
  std::string venue;
  std::vector<std::string> keywords;
  std::vector<Author> authors;
  std::vector<std::string> references;

  friend bool operator==(const PaperRecord&, const PaperRecord&) = default;
};

/// Papers and scholars with dense indices in first-seen order.
class CorpusStore {
 public:
  /// Appends a record. Throws DuplicateKeyError on a repeated paper id.
  /// Self-references are dropped.
  void add_paper(PaperRecord record);
  /// Recomputes citation masses; call after the last add_paper.
  void finalize();

  std::size_t paper_count() const noexcept { return papers_.size(); }
  std::size_t scholar_count() const noexcept { return scholar_ids_.size(); }

  const std::vector<PaperRecord>& papers() const noexcept { return papers_; }
  const PaperRecord& paper(std::size_t index) const { return papers_.at(index); }
  std::optional<std::size_t> paper_index(const std::string& paper_id) const;

  const std::vector<std::string>& scholar_ids() const noexcept { return scholar_ids_; }
  std::optional<std::size_t> scholar_index(const std::string& scholar_id) const;
  /// Indices of papers authored by scholar `s`, in insertion order.
  const std::vector<std::size_t>& authored(std::size_t s) const { return authored_.at(s); }
  /// In-corpus citations received by all papers of scholar `s`.
  std::uint64_t citation_mass(std::size_t s) const { return citation_mass_.at(s); }
  const std::vector<std::uint64_t>& citation_masses() const noexcept { return citation_mass_; }
  /// References of paper `p` that resolve inside the corpus, as paper indices.
  std::vector<std::size_t> in_corpus_references(std::size_t p) const;

  friend bool operator==(const CorpusStore& a, const CorpusStore& b) {
    return a.papers_ == b.papers_ && a.scholar_ids_ == b.scholar_ids_ &&
           a.authored_ == b.authored_ && a.citation_mass_ == b.citation_mass_;
  }

 private:
  std::vector<PaperRecord> papers_;
  std::unordered_map<std::string, std::size_t> paper_index_;
  std::vector<std::string> scholar_ids_;
  std::unordered_map<std::string, std::size_t> scholar_index_;
  std::vector<std::vector<std::size_t>> authored_;
  std::vector<std::uint64_t> citation_mass_;
};

/// Parses one JSON object per line. Blank lines are skipped. Throws ParseError
/// (with 1-based line number) or DuplicateKeyError.
CorpusStore parse_jsonl(std::istream& in);
CorpusStore parse_jsonl_file(const std::string& path);
PaperRecord parse_record(const std::string& line, std::size_t line_number);

std::string serialize_record(const PaperRecord& record);
/// One line per paper in corpus order, newline-terminated.
std::string serialize_jsonl(const CorpusStore& corpus);

struct SplitSpec {
  std::map<std::string, std::set<std::string>> train_positives;
  std::map<std::string, std::set<std::string>> test_positives;
  std::map<std::string, std::vector<std::string>> test_negatives;

  std::size_t scholar_count() const noexcept { return test_positives.size(); }
  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

/// Leave-one-out split: the latest reference-bearing paper's references are
/// the test positives, all other cited papers train, and three negatives per
/// test positive are drawn uniformly from papers the scholar never cited.
SplitSpec leave_one_out_split(const CorpusStore& corpus, std::uint64_t neg_seed);

struct SyntheticParams {
  std::size_t n_communities = 4;
  std::size_t scholars_per = 25;
  std::size_t papers_per_scholar = 6;
  double intra_cite_prob = 0.9;
  std::uint64_t seed = 7;
};

/// Planted-community corpus. Keywords, venues and text vocabulary are drawn
/// from per-community pools that do not overlap across communities.
CorpusStore generate_synthetic(const SyntheticParams& params);

/// Number of references drawn per synthetic paper.
inline constexpr std::size_t kSyntheticReferences = 8;

/// Community of a synthetic scholar or paper id, parsed from its prefix.
std::size_t synthetic_community(const std::string& id);

}  // namespace miarec
