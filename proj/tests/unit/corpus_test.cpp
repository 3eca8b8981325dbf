#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "helpers.hpp"
#include "threadlab/corpus.hpp"
#include "threadlab/rng.hpp"

using namespace threadlab;
using testutil::make_thread;

TEST_CASE("validate_thread accepts a well-formed thread") {
  const Thread t = make_thread("t1", "mary", {"mary", "don", "pat"});
  CHECK(validate_thread(t).empty());
}

TEST_CASE("validate_thread flags out-of-order timestamps naming the comment") {
  Thread t = make_thread("t1", "mary", {"a", "b", "c"});
  t.comments[2].time = t.comments[1].time - 5;
  const auto violations = validate_thread(t);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].find("comment 3") != std::string::npos);
  CHECK(violations[0].find("comment 2") != std::string::npos);
}

TEST_CASE("validate_thread flags empty author naming the comment") {
  Thread t = make_thread("t1", "mary", {"", "b"});
  const auto violations = validate_thread(t);
  REQUIRE(!violations.empty());
  CHECK(violations[0].find("comment 1") != std::string::npos);
}

TEST_CASE("social graph is undirected with no self-loops") {
  SocialGraph g;
  g.add_edge("a", "b");
  g.add_edge("b", "a");  // duplicate of the same undirected edge
  CHECK(g.edge_count() == 1);
  CHECK(g.has_edge("a", "b"));
  CHECK(g.has_edge("b", "a"));
  CHECK_THROWS_AS(g.add_edge("a", "a"), std::runtime_error);

  g.add_edge("b", "c");
  const auto edges = g.edges_sorted();
  REQUIRE(edges.size() == 2);
  CHECK(edges[0] == std::pair<std::string, std::string>("a", "b"));
  CHECK(edges[1] == std::pair<std::string, std::string>("b", "c"));
  REQUIRE(g.neighbors("b") != nullptr);
  CHECK(g.neighbors("b")->size() == 2);
  CHECK(g.neighbors("zzz") == nullptr);
}

TEST_CASE("save/load round-trips 100 random corpora") {
  Rng rng(2024);
  const auto dir = testutil::tmp_dir();
  const std::string tpath = (dir / "threads.jsonl").string();
  const std::string epath = (dir / "edges.csv").string();
  for (int rep = 0; rep < 100; ++rep) {
    const Corpus corpus = testutil::random_corpus(rng, 1 + rep % 7);
    save_corpus(corpus, tpath, epath);
    const Corpus loaded = load_corpus(tpath, epath);
    REQUIRE(loaded.threads.size() == corpus.threads.size());
    CHECK(loaded.threads == corpus.threads);
    CHECK(loaded.graph == corpus.graph);
  }
}

TEST_CASE("load_corpus reports malformed input with the line") {
  const auto dir = testutil::tmp_dir();
  const std::string tpath = (dir / "threads.jsonl").string();
  const std::string epath = (dir / "edges.csv").string();
  std::ofstream(epath) << "";

  {
    std::ofstream out(tpath);
    out << R"({"thread_id":"t1","poster_id":"p","post":{"text":"x","time":0},)"
        << R"("comments":[],"post_likes":[]})" << "\n";
    out << "{not json\n";
  }
  CHECK_THROWS_WITH_AS(load_corpus(tpath, epath), doctest::Contains(":2:"),
                       std::runtime_error);
}

TEST_CASE("load_corpus rejects duplicate thread ids and self-loop edges") {
  const auto dir = testutil::tmp_dir();
  const std::string tpath = (dir / "threads.jsonl").string();
  const std::string epath = (dir / "edges.csv").string();

  const std::string one_thread =
      R"({"thread_id":"t1","poster_id":"p","post":{"text":"x","time":0},)"
      R"("comments":[],"post_likes":[]})";
  {
    std::ofstream out(tpath);
    out << one_thread << "\n" << one_thread << "\n";
  }
  std::ofstream(epath) << "";
  CHECK_THROWS_WITH_AS(load_corpus(tpath, epath), doctest::Contains("t1"),
                       std::runtime_error);

  {
    std::ofstream out(tpath);
    out << one_thread << "\n";
  }
  std::ofstream(epath) << "p,p\n";
  CHECK_THROWS_AS(load_corpus(tpath, epath), std::runtime_error);
}

TEST_CASE("load_corpus includes all participants in the population") {
  const auto dir = testutil::tmp_dir();
  const std::string tpath = (dir / "threads.jsonl").string();
  const std::string epath = (dir / "edges.csv").string();
  Corpus corpus;
  corpus.threads.push_back(make_thread("t1", "alice", {"bob", "carol"}));
  corpus.graph.add_vertex("alice");
  corpus.graph.add_vertex("bob");
  corpus.graph.add_vertex("carol");
  corpus.graph.add_edge("alice", "bob");
  save_corpus(corpus, tpath, epath);

  const Corpus loaded = load_corpus(tpath, epath);
  CHECK(loaded.graph.has_vertex("alice"));
  CHECK(loaded.graph.has_vertex("carol"));
  CHECK(loaded.graph.has_edge("alice", "bob"));
}
