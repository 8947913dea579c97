#include "doctest.h"

#include <cmath>
#include <set>

#include "test_support.hpp"
#include "texting/corpus.hpp"

using namespace texting;
using testsupport::RawDoc;
using testsupport::TempDir;
using testsupport::write_dataset;

TEST_CASE("clean_and_tokenize lowercases, splits and drops stopwords") {
  const std::unordered_set<std::string> stop{"the", "was"};
  CHECK(clean_and_tokenize("The movie was GOOD", true, stop) ==
        std::vector<std::string>{"movie", "good"});
  CHECK(clean_and_tokenize("good", true, stop) ==
        std::vector<std::string>{"good"});
  CHECK(clean_and_tokenize("a b a", false, stop) ==
        std::vector<std::string>{"a", "b", "a"});
  CHECK(clean_and_tokenize("  the   was ", true, stop).empty());
  CHECK(clean_and_tokenize("", false, stop).empty());
}

TEST_CASE("tokenization is idempotent on clean token lists") {
  Rng rng(11);
  for (int round = 0; round < 50; ++round) {
    std::vector<std::string> tokens =
        testsupport::random_tokens(rng, 12, 1 + int(rng.below(20)));
    std::string joined;
    for (const auto& t : tokens) {
      if (!joined.empty()) joined += ' ';
      joined += t;
    }
    CHECK(clean_and_tokenize(joined, false, {}) == tokens);
  }
}

TEST_CASE("load_corpus parses the two-file layout") {
  TempDir dir("load");
  write_dataset(dir.str(), "tiny",
                {{"a", "train", "pos", "good"},
                 {"b", "test", "neg", "Bad Awful"},
                 {"c", "train", "neg", "awful thing"}});

  Corpus corpus = load_corpus(dir.str(), "tiny", {});
  REQUIRE(corpus.documents.size() == 3);
  CHECK(corpus.documents[0].tokens == std::vector<std::string>{"good"});
  CHECK(corpus.documents[1].tokens == std::vector<std::string>{"bad", "awful"});
  CHECK(corpus.documents[0].split == Split::train);
  CHECK(corpus.documents[1].split == Split::test);
  // classes sorted lexicographically
  CHECK(corpus.classes == std::vector<std::string>{"neg", "pos"});
  CHECK(corpus.documents[0].label == 1);
  CHECK(corpus.documents[1].label == 0);
  // vocabulary excludes the test-only word "bad"
  CHECK(corpus.in_vocabulary("good"));
  CHECK(corpus.in_vocabulary("awful"));
  CHECK(!corpus.in_vocabulary("bad"));
}

TEST_CASE("load_corpus single-line dataset") {
  TempDir dir("single");
  write_dataset(dir.str(), "one", {{"d0", "train", "x", "good"}});
  Corpus corpus = load_corpus(dir.str(), "one", {});
  REQUIRE(corpus.documents.size() == 1);
  CHECK(corpus.documents[0].tokens == std::vector<std::string>{"good"});
}

TEST_CASE("load_corpus error paths") {
  TempDir dir("errors");

  SUBCASE("missing files") {
    CHECK_THROWS_WITH_AS(load_corpus(dir.str(), "nope", {}),
                         doctest::Contains("nope.meta"), Error);
  }
  SUBCASE("line count mismatch") {
    write_dataset(dir.str(), "mis", {{"a", "train", "x", "one"}});
    std::ofstream(dir.str() + "/mis.texts", std::ios::app) << "extra line\n";
    try {
      load_corpus(dir.str(), "mis", {});
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.code() == "line_count_mismatch");
    }
  }
  SUBCASE("unknown split token") {
    write_dataset(dir.str(), "sp", {{"a", "dev", "x", "one"}});
    try {
      load_corpus(dir.str(), "sp", {});
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.code() == "unknown_split");
    }
  }
  SUBCASE("document empty after cleaning") {
    write_dataset(dir.str(), "empty", {{"a", "train", "x", "the was"}});
    LoadOptions opts;
    opts.remove_stopwords = true;
    try {
      load_corpus(dir.str(), "empty", opts);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.code() == "empty_document");
    }
  }
}

TEST_CASE("stopword defaults: off for mr, on otherwise") {
  CHECK(!default_remove_stopwords("mr"));
  CHECK(!default_remove_stopwords("MR"));
  CHECK(default_remove_stopwords("r8"));
  CHECK(default_remove_stopwords("ohsumed"));
  CHECK(builtin_stopwords().count("the") == 1);
  CHECK(builtin_stopwords().size() == 179);
}

TEST_CASE("split_train_val uses the round convention and is deterministic") {
  SUBCASE("10 docs, ratio 0.9 -> 9/1") {
    std::vector<RawDoc> docs;
    for (int i = 0; i < 10; ++i)
      docs.push_back({"d" + std::to_string(i), "train", "x", "tok" + std::to_string(i)});
    TempDir dir("split10");
    write_dataset(dir.str(), "ds", docs);
    Corpus corpus = load_corpus(dir.str(), "ds", {});
    Corpus out = split_train_val(corpus, 0.9, 5);
    int train = 0, val = 0;
    for (const auto& d : out.documents) {
      if (d.split == Split::train) ++train;
      if (d.split == Split::val) ++val;
    }
    CHECK(train == 9);
    CHECK(val == 1);
  }

  SUBCASE("7108 train docs, ratio 0.9 -> 6397/711") {
    Corpus corpus;
    corpus.classes = {"x"};
    for (int i = 0; i < 7108; ++i) {
      Document d;
      d.id = std::to_string(i);
      d.tokens = {"t"};
      d.label = 0;
      d.split = Split::train;
      corpus.documents.push_back(std::move(d));
    }
    for (int i = 0; i < 3554; ++i) {
      Document d;
      d.id = "t" + std::to_string(i);
      d.tokens = {"t"};
      d.label = 0;
      d.split = Split::test;
      corpus.documents.push_back(std::move(d));
    }
    Corpus out = split_train_val(corpus, 0.9, 1);
    long train = 0, val = 0, test = 0;
    for (const auto& d : out.documents) {
      if (d.split == Split::train) ++train;
      else if (d.split == Split::val) ++val;
      else ++test;
    }
    CHECK(train == 6397);
    CHECK(val == 711);
    CHECK(test == 3554);
  }

  SUBCASE("same seed twice gives the identical assignment") {
    Corpus corpus = testsupport::toy_corpus(20, 0, 4);
    Corpus a = split_train_val(corpus, 0.8, 99);
    Corpus b = split_train_val(corpus, 0.8, 99);
    for (size_t i = 0; i < a.documents.size(); ++i)
      CHECK(a.documents[i].split == b.documents[i].split);
    Corpus c = split_train_val(corpus, 0.8, 100);
    bool any_differs = false;
    for (size_t i = 0; i < a.documents.size(); ++i)
      any_differs |= a.documents[i].split != c.documents[i].split;
    CHECK(any_differs);
  }

  SUBCASE("degenerate ratios error") {
    Corpus corpus = testsupport::toy_corpus(2, 0, 1);
    CHECK_THROWS_AS(split_train_val(corpus, 0.999, 1), Error);
    CHECK_THROWS_AS(split_train_val(corpus, 1.5, 1), Error);
  }
}

TEST_CASE("vocabulary closure: no test-only word in Corpus.vocabulary") {
  Corpus corpus = testsupport::toy_corpus(8, 2, 4);
  corpus.documents[corpus.documents.size() - 1].tokens.push_back("testonlyword");
  rebuild_vocabulary(corpus);
  CHECK(!corpus.in_vocabulary("testonlyword"));
  for (const auto& d : corpus.documents) {
    if (d.split == Split::test) continue;
    for (const auto& w : d.tokens) CHECK(corpus.in_vocabulary(w));
  }
}

TEST_CASE("load_embeddings parses vectors and skips malformed lines") {
  TempDir dir("emb");
  {
    std::ofstream f(dir.str() + "/v.txt");
    f << "good 0.1 0.2 0.3\n";
    f << "broken 0.5 0.5\n";          // wrong arity
    f << "bad 1.0 2.0 notanumber\n";  // unparsable
    f << "fine -1 2e-1 3.5\n";
  }
  EmbeddingTable t = load_embeddings(dir.str() + "/v.txt", 3, 7);
  CHECK(t.skipped_lines == 2);
  auto good = t.lookup<double>("good");
  CHECK(good[0] == doctest::Approx(0.1));
  CHECK(good[1] == doctest::Approx(0.2));
  CHECK(good[2] == doctest::Approx(0.3));
  auto fine = t.lookup<double>("fine");
  CHECK(fine[0] == doctest::Approx(-1.0));

  SUBCASE("zero usable lines errors") {
    std::ofstream(dir.str() + "/e.txt") << "only two 1.0\n";
    CHECK_THROWS_AS(load_embeddings(dir.str() + "/e.txt", 5, 7), Error);
  }
  SUBCASE("unreadable file errors") {
    CHECK_THROWS_AS(load_embeddings(dir.str() + "/absent.txt", 3, 7), Error);
  }
}

TEST_CASE("OOV vectors are bounded, seeded and stable") {
  EmbeddingTable t;
  t.dimension = 16;
  t.oov_seed = 1234;

  auto a = t.lookup<double>("unseenword");
  auto b = t.lookup<double>("unseenword");
  CHECK(a == b);  // identical on repeat lookups
  for (double x : a) {
    CHECK(x >= -0.01);
    CHECK(x <= 0.01);
  }

  auto c = t.lookup<double>("otherword");
  CHECK(a != c);

  EmbeddingTable t2 = t;
  t2.oov_seed = 4321;
  CHECK(t2.lookup<double>("unseenword") != a);

  // lookup order must not matter: pure function of (word, seed)
  EmbeddingTable t3;
  t3.dimension = 16;
  t3.oov_seed = 1234;
  auto c3 = t3.lookup<double>("otherword");
  auto a3 = t3.lookup<double>("unseenword");
  CHECK(a3 == a);
  CHECK(c3 == c);
}

TEST_CASE("corpus_stats computes per-document uniques and Prop.NW") {
  SUBCASE("one train doc [a,b], one test doc [a,c] -> Prop.NW 50%") {
    Corpus corpus;
    corpus.classes = {"x"};
    Document d1;
    d1.id = "1";
    d1.tokens = {"a", "b"};
    d1.label = 0;
    d1.split = Split::train;
    Document d2;
    d2.id = "2";
    d2.tokens = {"a", "c"};
    d2.label = 0;
    d2.split = Split::test;
    corpus.documents = {d1, d2};
    StatsReport r = corpus_stats(corpus);
    CHECK(r.documents == 2);
    CHECK(r.train_documents == 1);
    CHECK(r.test_documents == 1);
    CHECK(r.prop_new_words == doctest::Approx(0.5));
    CHECK(r.max_vocab == 2);
    CHECK(r.min_vocab == 2);
    CHECK(r.avg_vocab == doctest::Approx(2.0));
  }

  SUBCASE("duplicate tokens count once per document") {
    Corpus corpus;
    corpus.classes = {"x"};
    Document d;
    d.id = "1";
    d.tokens = {"a", "a", "b", "a"};
    d.label = 0;
    d.split = Split::train;
    corpus.documents = {d};
    StatsReport r = corpus_stats(corpus);
    CHECK(r.max_vocab == 2);
    CHECK(r.avg_vocab == doctest::Approx(2.0));
  }
}

TEST_CASE("reference stats exist exactly for the four benchmarks") {
  CHECK(reference_stats("mr").has_value());
  CHECK(reference_stats("R8").has_value());
  CHECK(reference_stats("r52").has_value());
  CHECK(reference_stats("Ohsumed").has_value());
  CHECK(!reference_stats("imdb").has_value());

  const ReferenceStats mr = *reference_stats("mr");
  CHECK(mr.documents == 10662);
  CHECK(mr.train_documents == 7108);
  CHECK(mr.test_documents == 3554);
  CHECK(mr.classes == 2);
  CHECK(mr.max_vocab == 46);
  CHECK(mr.min_vocab == 1);
  CHECK(mr.avg_vocab == doctest::Approx(18.46));
  CHECK(mr.prop_new_words == doctest::Approx(30.07));
}

TEST_CASE("matches_reference flags the first differing cell") {
  StatsReport r;
  r.documents = 10662;
  r.train_documents = 7108;
  r.test_documents = 3554;
  r.classes = 2;
  r.max_vocab = 46;
  r.min_vocab = 1;
  r.avg_vocab = 18.4618;   // rounds to 18.46
  r.prop_new_words = 0.300651;  // rounds to 30.07%
  std::string detail;
  CHECK(matches_reference(r, *reference_stats("mr"), &detail));

  r.max_vocab = 47;
  CHECK(!matches_reference(r, *reference_stats("mr"), &detail));
  CHECK(detail.find("max_vocab") != std::string::npos);
}
