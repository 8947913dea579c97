#include "texting/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace texting {

std::string adj_norm_name(AdjNorm mode) {
  switch (mode) {
    case AdjNorm::none: return "none";
    case AdjNorm::row: return "row";
    case AdjNorm::symmetric: return "symmetric";
  }
  return "?";
}

AdjNorm parse_adj_norm(std::string_view name) {
  if (name == "none") return AdjNorm::none;
  if (name == "row") return AdjNorm::row;
  if (name == "symmetric") return AdjNorm::symmetric;
  fail("bad_config", "unknown adjacency normalization '" + std::string(name) + "'");
}

GlobalWordGraph build_global_pmi_graph(const Corpus& corpus, int window) {
  if (window < 2) fail("bad_window", "window must be at least 2");

  GlobalWordGraph g;
  g.window_size = window;

  uint64_t fp = 0xcbf29ce484222325ull;
  auto word_id = [&g](const std::string& w) {
    auto [it, inserted] = g.word_index.emplace(w, int(g.words.size()));
    if (inserted) g.words.push_back(w);
    return it->second;
  };

  long long total_windows = 0;
  std::unordered_map<int, long long> word_windows;
  std::unordered_map<uint64_t, long long> pair_windows;
  std::vector<int> ids;
  std::vector<int> uniq;

  for (const Document& doc : corpus.documents) {
    if (doc.split == Split::test) continue;
    fp = mix_seed(fp, fnv1a64(doc.id));
    ids.clear();
    for (const std::string& tok : doc.tokens) {
      ids.push_back(word_id(tok));
      fp = mix_seed(fp, fnv1a64(tok));
    }
    const size_t len = ids.size();
    const size_t span = std::min<size_t>(size_t(window), len);
    const size_t n_windows = len >= size_t(window) ? len - size_t(window) + 1 : 1;
    for (size_t start = 0; start < n_windows; ++start) {
      ++total_windows;
      uniq.assign(ids.begin() + long(start), ids.begin() + long(start + span));
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      for (size_t a = 0; a < uniq.size(); ++a) {
        ++word_windows[uniq[a]];
        for (size_t b = a + 1; b < uniq.size(); ++b)
          ++pair_windows[GlobalWordGraph::pack(uniq[a], uniq[b])];
      }
    }
  }
  g.corpus_fingerprint = fp;

  for (const auto& [key, count] : pair_windows) {
    const int i = int(key >> 32);
    const int j = int(key & 0xffffffffull);
    const double pmi =
        std::log(double(count) * double(total_windows) /
                 (double(word_windows.at(i)) * double(word_windows.at(j))));
    if (pmi > 0.0) g.weights.emplace(key, pmi);
  }
  return g;
}

namespace {

std::string json_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += char(c);
        }
    }
  }
  return out;
}

}  // namespace

template <class T>
void write_graph_dump(std::ostream& out, const std::vector<DocGraph<T>>& graphs) {
  char num[64];
  for (const DocGraph<T>& g : graphs) {
    out << "{\"id\":\"" << json_escape(g.id) << "\",\"nodes\":[";
    for (int i = 0; i < g.node_count(); ++i) {
      if (i) out << ',';
      out << '"' << json_escape(g.node_words[size_t(i)]) << '"';
    }
    out << "],\"edges\":[";
    bool first = true;
    for (int i = 0; i < g.node_count(); ++i) {
      for (int j = i + 1; j < g.node_count(); ++j) {
        if (g.adjacency(i, j) == T(0) && g.adjacency(j, i) == T(0)) continue;
        if (!first) out << ',';
        first = false;
        std::snprintf(num, sizeof num, "%.9g", double(g.adjacency(i, j)));
        out << '[' << i << ',' << j << ',' << num << ']';
      }
    }
    out << "],\"label\":" << g.label << "}\n";
  }
}

template void write_graph_dump<float>(std::ostream&,
                                      const std::vector<DocGraph<float>>&);
template void write_graph_dump<double>(std::ostream&,
                                       const std::vector<DocGraph<double>>&);

}  // namespace texting
