#include "miarec/corpus.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

#include "miarec/error.hpp"
#include "miarec/rng.hpp"

namespace miarec {

using nlohmann::json;

void CorpusStore::add_paper(PaperRecord record) {
  if (paper_index_.contains(record.paper_id)) throw DuplicateKeyError(record.paper_id);
  std::erase(record.references, record.paper_id);
  const std::size_t p = papers_.size();
  paper_index_.emplace(record.paper_id, p);
  std::set<std::string> seen;
  for (const Author& a : record.authors) {
    if (!seen.insert(a.id).second) continue;
    auto [it, inserted] = scholar_index_.emplace(a.id, scholar_ids_.size());
    if (inserted) {
      scholar_ids_.push_back(a.id);
      authored_.emplace_back();
    }
    authored_[it->second].push_back(p);
  }
  papers_.push_back(std::move(record));
}

void CorpusStore::finalize() {
  std::vector<std::uint64_t> cited(papers_.size(), 0);
  for (std::size_t p = 0; p < papers_.size(); ++p)
    for (std::size_t q : in_corpus_references(p)) ++cited[q];
  citation_mass_.assign(scholar_ids_.size(), 0);
  for (std::size_t s = 0; s < scholar_ids_.size(); ++s)
    for (std::size_t p : authored_[s]) citation_mass_[s] += cited[p];
}

std::optional<std::size_t> CorpusStore::paper_index(const std::string& paper_id) const {
  auto it = paper_index_.find(paper_id);
  if (it == paper_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> CorpusStore::scholar_index(const std::string& scholar_id) const {
  auto it = scholar_index_.find(scholar_id);
  if (it == scholar_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> CorpusStore::in_corpus_references(std::size_t p) const {
  std::vector<std::size_t> out;
  for (const auto& ref : papers_.at(p).references) {
    if (auto q = paper_index(ref)) out.push_back(*q);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

std::string require_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, std::string("missing \"") + key + "\"");
  if (!it->is_string()) throw ParseError(line, std::string("\"") + key + "\" must be a string");
  return it->get<std::string>();
}

std::vector<std::string> string_array(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, std::string("missing \"") + key + "\"");
  if (!it->is_array()) throw ParseError(line, std::string("\"") + key + "\" must be an array");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw ParseError(line, std::string("\"") + key + "\" entries must be strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

PaperRecord parse_record(const std::string& line, std::size_t line_number) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_number, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line_number, "expected a JSON object");

  PaperRecord r;
  r.paper_id = require_string(obj, "id", line_number);
  if (r.paper_id.empty()) throw ParseError(line_number, "empty \"id\"");
  r.title = require_string(obj, "title", line_number);
  if (auto it = obj.find("abstract"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError(line_number, "\"abstract\" must be a string");
    r.abstract = it->get<std::string>();
  }
  auto year = obj.find("year");
  if (year == obj.end() || !year->is_number_integer()) {
    throw ParseError(line_number, "\"year\" must be an integer");
  }
  r.year = year->get<int>();
  r.venue = require_string(obj, "venue", line_number);
  r.keywords = string_array(obj, "keywords", line_number);
  r.references = string_array(obj, "references", line_number);

  auto authors = obj.find("authors");
  if (authors == obj.end() || !authors->is_array()) {
    throw ParseError(line_number, "\"authors\" must be an array");
  }
  for (const auto& a : *authors) {
    if (!a.is_object()) throw ParseError(line_number, "author entries must be objects");
    Author author;
    author.id = require_string(a, "id", line_number);
    if (author.id.empty()) throw ParseError(line_number, "empty author id");
    author.name = require_string(a, "name", line_number);
    if (auto org = a.find("org"); org != a.end() && !org->is_null()) {
      if (!org->is_string()) throw ParseError(line_number, "author \"org\" must be a string");
      author.org = org->get<std::string>();
    }
    r.authors.push_back(std::move(author));
  }
  if (r.authors.empty()) throw ParseError(line_number, "paper has no authors");
  std::erase(r.references, r.paper_id);
  return r;
}

CorpusStore parse_jsonl(std::istream& in) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));

  // Records are parsed independently; the first failing line (by number) wins
  // so the error does not depend on thread scheduling.
  const auto n = static_cast<std::int64_t>(lines.size());
  std::vector<std::optional<PaperRecord>> records(lines.size());
  std::vector<std::string> errors(lines.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& line = lines[i];
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records[i] = parse_record(line, static_cast<std::size_t>(i) + 1);
    } catch (const ParseError& e) {
      errors[i] = e.what();
    }
  }

  CorpusStore corpus;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!errors[i].empty()) {
      // Re-raise with the original message.
      parse_record(lines[i], i + 1);
    }
    if (records[i]) corpus.add_paper(std::move(*records[i]));
  }
  corpus.finalize();
  return corpus;
}

CorpusStore parse_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open corpus file: " + path);
  return parse_jsonl(in);
}

std::string serialize_record(const PaperRecord& r) {
  nlohmann::ordered_json obj;
  obj["id"] = r.paper_id;
  obj["title"] = r.title;
  if (r.abstract) obj["abstract"] = *r.abstract;
  obj["year"] = r.year;
  obj["venue"] = r.venue;
  obj["keywords"] = r.keywords;
  auto authors = nlohmann::ordered_json::array();
  for (const Author& a : r.authors) {
    nlohmann::ordered_json entry;
    entry["id"] = a.id;
    entry["name"] = a.name;
    if (a.org) entry["org"] = *a.org;
    authors.push_back(std::move(entry));
  }
  obj["authors"] = std::move(authors);
  obj["references"] = r.references;
  return obj.dump();
}

std::string serialize_jsonl(const CorpusStore& corpus) {
  std::string out;
  for (const auto& p : corpus.papers()) {
    out += serialize_record(p);
    out += '\n';
  }
  return out;
}

SplitSpec leave_one_out_split(const CorpusStore& corpus, std::uint64_t neg_seed) {
  SplitSpec split;
  Rng rng = make_stream(neg_seed);
  for (std::size_t s = 0; s < corpus.scholar_count(); ++s) {
    std::vector<std::size_t> bearing;
    for (std::size_t p : corpus.authored(s)) {
      if (!corpus.in_corpus_references(p).empty()) bearing.push_back(p);
    }
    if (bearing.size() < 2) continue;

    const auto latest = *std::max_element(bearing.begin(), bearing.end(), [&](auto a, auto b) {
      const auto& pa = corpus.paper(a);
      const auto& pb = corpus.paper(b);
      if (pa.year != pb.year) return pa.year < pb.year;
      return pa.paper_id < pb.paper_id;
    });

    std::set<std::size_t> test;
    for (std::size_t q : corpus.in_corpus_references(latest)) test.insert(q);
    std::set<std::size_t> train;
    for (std::size_t p : bearing) {
      if (p == latest) continue;
      for (std::size_t q : corpus.in_corpus_references(p)) {
        if (!test.contains(q)) train.insert(q);
      }
    }

    std::vector<std::size_t> candidates;
    for (std::size_t q = 0; q < corpus.paper_count(); ++q) {
      if (!test.contains(q) && !train.contains(q)) candidates.push_back(q);
    }
    const std::size_t wanted = 3 * test.size();
    const std::string& sid = corpus.scholar_ids()[s];
    if (candidates.size() < wanted) {
      throw InsufficientCandidatesError("scholar " + sid + " needs " + std::to_string(wanted) +
                                        " negatives but only " +
                                        std::to_string(candidates.size()) + " papers qualify");
    }
    std::vector<std::size_t> picked;
    std::sample(candidates.begin(), candidates.end(), std::back_inserter(picked), wanted, rng);

    auto& tr = split.train_positives[sid];
    for (std::size_t q : train) tr.insert(corpus.paper(q).paper_id);
    auto& te = split.test_positives[sid];
    for (std::size_t q : test) te.insert(corpus.paper(q).paper_id);
    auto& neg = split.test_negatives[sid];
    for (std::size_t q : picked) neg.push_back(corpus.paper(q).paper_id);
  }
  return split;
}

namespace {

std::string padded(std::size_t v, int width) {
  std::string s = std::to_string(v);
  if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), '0');
  return s;
}

constexpr std::size_t kKeywordPool = 12;
constexpr std::size_t kKeywordsPerPaper = 4;
constexpr std::size_t kVocabPerCommunity = 40;
constexpr std::size_t kVenuesPerCommunity = 2;
constexpr std::size_t kOrgsPerCommunity = 3;
constexpr std::size_t kTitleWords = 6;
constexpr std::size_t kAbstractWords = 40;
constexpr double kGeneralWordProb = 0.25;

const std::vector<std::string>& general_words() {
  static const std::vector<std::string> words = {"model",    "method", "results", "analysis",
                                                 "approach", "data",   "study",   "framework"};
  return words;
}

std::string text(Rng& rng, std::size_t community, std::size_t n_words) {
  std::string out;
  std::bernoulli_distribution general(kGeneralWordProb);
  for (std::size_t w = 0; w < n_words; ++w) {
    if (!out.empty()) out += ' ';
    if (general(rng)) {
      out += general_words()[uniform_index(rng, general_words().size())];
    } else {
      out += "topic" + std::to_string(community) + "term" +
             std::to_string(uniform_index(rng, kVocabPerCommunity));
    }
  }
  return out;
}

}  // namespace

std::size_t synthetic_community(const std::string& id) {
  if (id.size() < 2 || id[0] != 'c') throw LookupError("not a synthetic id: " + id);
  return static_cast<std::size_t>(std::stoul(id.substr(1, id.find('-') - 1)));
}

CorpusStore generate_synthetic(const SyntheticParams& params) {
  if (params.n_communities < 1 || params.scholars_per < 1 || params.papers_per_scholar < 1) {
    throw ConfigError("synthetic corpus counts must be >= 1");
  }
  if (!(params.intra_cite_prob >= 0.0 && params.intra_cite_prob <= 1.0)) {
    throw ConfigError("intra_cite_prob must lie in [0, 1]");
  }
  Rng rng = make_stream(params.seed);
  const std::size_t per_community = params.scholars_per * params.papers_per_scholar;
  const std::size_t total = params.n_communities * per_community;

  auto scholar_id = [&](std::size_t c, std::size_t s) {
    return "c" + std::to_string(c) + "-s" + padded(s, 3);
  };
  auto paper_id = [&](std::size_t c, std::size_t p) {
    return "c" + std::to_string(c) + "-p" + padded(p, 4);
  };
  auto org_of = [&](std::size_t c, std::size_t s) {
    return "Org " + std::to_string(c) + "-" + std::to_string(s % kOrgsPerCommunity);
  };
  auto author = [&](std::size_t c, std::size_t s) {
    return Author{scholar_id(c, s), "Scholar " + std::to_string(c) + "." + std::to_string(s),
                  org_of(c, s)};
  };

  std::vector<PaperRecord> papers;
  papers.reserve(total);
  for (std::size_t c = 0; c < params.n_communities; ++c) {
    for (std::size_t s = 0; s < params.scholars_per; ++s) {
      for (std::size_t k = 0; k < params.papers_per_scholar; ++k) {
        PaperRecord r;
        r.paper_id = paper_id(c, s * params.papers_per_scholar + k);
        r.title = text(rng, c, kTitleWords);
        r.abstract = text(rng, c, kAbstractWords);
        r.year = 2015 + static_cast<int>(k);
        r.venue = "Venue " + std::to_string(c) + "-" +
                  std::to_string(uniform_index(rng, kVenuesPerCommunity));
        std::vector<std::size_t> kw(kKeywordPool);
        for (std::size_t i = 0; i < kKeywordPool; ++i) kw[i] = i;
        std::vector<std::size_t> chosen;
        std::sample(kw.begin(), kw.end(), std::back_inserter(chosen), kKeywordsPerPaper, rng);
        for (std::size_t i : chosen) {
          r.keywords.push_back("kw" + std::to_string(c) + "-" + std::to_string(i));
        }
        r.authors.push_back(author(c, s));
        // Up to two co-authors from the same community.
        std::bernoulli_distribution coauthor(0.5);
        for (int extra = 0; extra < 2 && params.scholars_per > 1; ++extra) {
          if (!coauthor(rng)) break;
          const std::size_t other = uniform_index(rng, params.scholars_per);
          const auto candidate = author(c, other);
          if (std::none_of(r.authors.begin(), r.authors.end(),
                           [&](const Author& a) { return a.id == candidate.id; })) {
            r.authors.push_back(candidate);
          }
        }
        papers.push_back(std::move(r));
      }
    }
  }

  std::bernoulli_distribution inside(params.intra_cite_prob);
  for (std::size_t c = 0; c < params.n_communities; ++c) {
    for (std::size_t p = 0; p < per_community; ++p) {
      PaperRecord& r = papers[c * per_community + p];
      std::set<std::string> refs;
      for (std::size_t draw = 0; draw < kSyntheticReferences; ++draw) {
        const bool stay = inside(rng) || params.n_communities == 1;
        std::size_t target_c = c;
        if (!stay) {
          target_c = uniform_index(rng, params.n_communities - 1);
          if (target_c >= c) ++target_c;
        }
        const std::size_t q = uniform_index(rng, per_community);
        if (target_c == c && q == p) continue;
        refs.insert(paper_id(target_c, q));
      }
      r.references.assign(refs.begin(), refs.end());
    }
  }

  CorpusStore corpus;
  for (auto& r : papers) corpus.add_paper(std::move(r));
  corpus.finalize();
  return corpus;
}

}  // namespace miarec
