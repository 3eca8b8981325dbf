#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace threadlab {

struct Like {
  std::string user_id;
  std::int64_t time = 0;
  bool operator==(const Like&) const = default;
};

struct Comment {
  std::string author_id;
  std::string text;
  std::int64_t time = 0;
  // Likes the comment had accumulated by observation time ("likes" in the
  // JSONL schema). Feeds the comment_likes feature.
  std::int64_t likes = 0;
  bool operator==(const Comment&) const = default;
};

// A post plus its ordered comment sequence. Thread length = number of
// comments; the post itself is not counted.
struct Thread {
  std::string thread_id;
  std::string poster_id;
  std::string post_text;
  std::int64_t post_time = 0;
  std::vector<Comment> comments;
  std::vector<Like> post_likes;

  std::size_t length() const { return comments.size(); }
  bool operator==(const Thread&) const = default;
};

// Undirected graph over participant ids. No self-loops.
class SocialGraph {
 public:
  void add_vertex(const std::string& v);
  void add_edge(const std::string& u, const std::string& v);
  bool has_vertex(const std::string& v) const;
  bool has_edge(const std::string& u, const std::string& v) const;
  // nullptr when v is not a vertex
  const std::set<std::string>* neighbors(const std::string& v) const;
  std::size_t edge_count() const { return n_edges_; }
  std::size_t vertex_count() const { return adj_.size(); }
  // Each edge once, endpoints ordered, list sorted: canonical on-disk order.
  std::vector<std::pair<std::string, std::string>> edges_sorted() const;
  bool operator==(const SocialGraph& other) const { return adj_ == other.adj_; }

 private:
  std::map<std::string, std::set<std::string>> adj_;
  std::size_t n_edges_ = 0;
};

struct Corpus {
  std::vector<Thread> threads;
  SocialGraph graph;
  // uniform / high-activity / wiki-style / synthetic. In-memory metadata;
  // not part of the on-disk format.
  std::string population = "synthetic";
};

// Empty list iff all Thread invariants hold; otherwise one human-readable
// entry per violation.
std::vector<std::string> validate_thread(const Thread& t);

// Threads file: JSONL, one thread per line. Edges file: CSV "u,v", no
// header, each undirected edge once. Throws std::runtime_error naming the
// offending line/field on malformed input, duplicate thread ids, self-loop
// edges, or invariant violations.
Corpus load_corpus(const std::string& threads_path,
                   const std::string& edges_path);

void save_corpus(const Corpus& corpus, const std::string& threads_path,
                 const std::string& edges_path);

}  // namespace threadlab
