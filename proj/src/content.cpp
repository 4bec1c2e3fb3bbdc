#include "miarec/content.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "miarec/error.hpp"
#include "miarec/numkernel.hpp"
#include "miarec/rng.hpp"

namespace miarec {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2) out.push_back(cur);
    cur.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& documents,
                             std::size_t min_count) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& doc : documents)
    for (const auto& t : doc)
      if (counts[t]++ == 0) order.push_back(t);
  Vocabulary v;
  v.min_count_ = min_count;
  for (const auto& t : order) {
    if (counts[t] < min_count) continue;
    v.index_.emplace(t, v.tokens_.size());
    v.tokens_.push_back(t);
    v.counts_.push_back(counts[t]);
  }
  return v;
}

std::optional<std::size_t> Vocabulary::index(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

DocVectors::DocVectors(std::vector<std::string> paper_ids, Dense matrix)
    : paper_ids_(std::move(paper_ids)), matrix_(std::move(matrix)) {
  if (paper_ids_.size() != matrix_.rows()) throw DimensionError("one vector per paper id required");
  for (std::size_t i = 0; i < paper_ids_.size(); ++i) {
    if (!index_.emplace(paper_ids_[i], i).second) throw DuplicateKeyError(paper_ids_[i]);
  }
}

std::optional<std::size_t> DocVectors::index(const std::string& paper_id) const {
  auto it = index_.find(paper_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const double> DocVectors::vector(const std::string& paper_id) const {
  auto i = index(paper_id);
  if (!i) throw CoverageError(paper_id);
  return matrix_.row(*i);
}

DocVectors DocVectors::aligned_to(const CorpusStore& corpus) const {
  Dense out(corpus.paper_count(), dim());
  std::vector<std::string> ids;
  for (std::size_t p = 0; p < corpus.paper_count(); ++p) {
    const auto& id = corpus.paper(p).paper_id;
    auto src = vector(id);
    std::copy(src.begin(), src.end(), out.row(p).begin());
    ids.push_back(id);
  }
  return DocVectors(std::move(ids), std::move(out));
}

std::string document_text(const PaperRecord& paper) {
  return paper.title + " " + paper.abstract.value_or("");
}

double pvdbow_pair_loss(std::span<const double> doc, std::span<const double> word,
                        const std::vector<std::span<const double>>& negatives) {
  double loss = -log_sigmoid(dot(doc, word));
  for (auto n : negatives) loss -= log_sigmoid(-dot(doc, n));
  return loss;
}

std::vector<double> pvdbow_pair_doc_gradient(std::span<const double> doc,
                                             std::span<const double> word,
                                             const std::vector<std::span<const double>>& negatives) {
  std::vector<double> g(doc.size(), 0.0);
  const double gw = -(1.0 - sigmoid(dot(doc, word)));
  for (std::size_t x = 0; x < g.size(); ++x) g[x] += gw * word[x];
  for (auto n : negatives) {
    const double gn = sigmoid(dot(doc, n));
    for (std::size_t x = 0; x < g.size(); ++x) g[x] += gn * n[x];
  }
  return g;
}

PvDbowResult train_pvdbow(const CorpusStore& corpus, const ContentConfig& config) {
  if (config.dim < 1 || config.epochs < 1 || config.negatives < 1) {
    throw ConfigError("content dim, epochs and negatives must be >= 1");
  }
  std::vector<std::vector<std::string>> docs;
  docs.reserve(corpus.paper_count());
  for (const auto& p : corpus.papers()) docs.push_back(tokenize(document_text(p)));
  const Vocabulary vocab = Vocabulary::build(docs, config.min_count);
  if (vocab.size() == 0) throw ConfigError("content vocabulary is empty");

  std::vector<std::vector<std::size_t>> doc_words(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d)
    for (const auto& t : docs[d])
      if (auto i = vocab.index(t)) doc_words[d].push_back(*i);

  std::vector<double> weights(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    weights[i] = std::pow(static_cast<double>(vocab.count(i)), 0.75);
  }
  std::discrete_distribution<std::size_t> unigram(weights.begin(), weights.end());

  Rng rng = make_stream(config.seed, {0x706f});
  const std::size_t dim = config.dim;
  Dense doc_vecs(docs.size(), dim);
  std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(dim),
                                              0.5 / static_cast<double>(dim));
  PvDbowResult result;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (doc_words[d].empty()) {
      Dense x = xavier_init(1, dim, rng);
      std::copy(x.row(0).begin(), x.row(0).end(), doc_vecs.row(d).begin());
      result.untrained.push_back(corpus.paper(d).paper_id);
      std::cerr << "warning: paper " << corpus.paper(d).paper_id
                << " has no vocabulary tokens; its vector is untrained\n";
    } else {
      for (double& v : doc_vecs.row(d)) v = init(rng);
    }
  }
  Dense word_vecs(vocab.size(), dim);

  std::size_t total_pairs = 0;
  for (const auto& w : doc_words) total_pairs += w.size();
  const double total_steps = static_cast<double>(total_pairs * config.epochs);
  std::size_t step = 0;

  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> doc_grad(dim);
  std::vector<std::size_t> targets(config.negatives + 1);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t d : order) {
      auto v = doc_vecs.row(d);
      for (std::size_t w : doc_words[d]) {
        const double lr = std::max(config.learning_rate * 1e-4,
                                   config.learning_rate * (1.0 - static_cast<double>(step) / total_steps));
        ++step;
        targets[0] = w;
        for (std::size_t n = 1; n <= config.negatives; ++n) {
          std::size_t t = unigram(rng);
          while (t == w && vocab.size() > 1) t = unigram(rng);
          targets[n] = t;
        }
        std::fill(doc_grad.begin(), doc_grad.end(), 0.0);
        for (std::size_t n = 0; n < targets.size(); ++n) {
          auto c = word_vecs.row(targets[n]);
          const double label = n == 0 ? 1.0 : 0.0;
          const double s = dot(v, c);
          epoch_loss -= log_sigmoid(n == 0 ? s : -s);
          const double g = (label - sigmoid(s)) * lr;
          for (std::size_t x = 0; x < dim; ++x) {
            doc_grad[x] += g * c[x];
            c[x] += g * v[x];
          }
        }
        for (std::size_t x = 0; x < dim; ++x) v[x] += doc_grad[x];
      }
    }
    result.epoch_loss.push_back(total_pairs ? epoch_loss / static_cast<double>(total_pairs) : 0.0);
  }

  std::vector<std::string> ids;
  for (const auto& p : corpus.papers()) ids.push_back(p.paper_id);
  result.vectors = DocVectors(std::move(ids), std::move(doc_vecs));
  return result;
}

std::string format_vectors(const DocVectors& vectors) {
  std::string out = "#dim " + std::to_string(vectors.dim()) + "\n";
  char buf[40];
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    out += vectors.paper_ids()[i];
    for (double v : vectors.matrix().row(i)) {
      std::snprintf(buf, sizeof buf, " %.17g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void save_vectors(const DocVectors& vectors, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write vector file: " + path);
  out << format_vectors(vectors);
}

DocVectors parse_vectors(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream hs(line);
    std::string tag;
    hs >> tag;
    if (tag != "#dim" || !(hs >> dim) || dim == 0) {
      throw FormatError(line_no, "expected \"#dim <positive integer>\" header");
    }
    break;
  }
  if (dim == 0) throw FormatError(line_no, "missing \"#dim\" header");

  std::vector<std::string> ids;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string id;
    ls >> id;
    std::size_t width = 0;
    for (std::string tok; ls >> tok; ++width) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw FormatError(line_no, "not a number: " + tok);
      }
    }
    if (width != dim) {
      throw FormatError(line_no, "row has " + std::to_string(width) + " values, expected " +
                                     std::to_string(dim));
    }
    ids.push_back(std::move(id));
  }
  const std::size_t rows = ids.size();
  return DocVectors(std::move(ids), Dense(rows, dim, std::move(values)));
}

DocVectors load_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open vector file: " + path);
  return parse_vectors(in);
}

DocVectors load_vectors(const std::string& path, const CorpusStore& corpus) {
  return load_vectors(path).aligned_to(corpus);
}

}  // namespace miarec
