#include "threadlab/corpus.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"
#include "threadlab/util.hpp"

namespace threadlab {

using nlohmann::json;

void SocialGraph::add_vertex(const std::string& v) { adj_[v]; }

void SocialGraph::add_edge(const std::string& u, const std::string& v) {
  if (u == v) {
    throw std::runtime_error("self-loop edge on '" + u + "'");
  }
  bool inserted = adj_[u].insert(v).second;
  adj_[v].insert(u);
  if (inserted) ++n_edges_;
}

bool SocialGraph::has_vertex(const std::string& v) const {
  return adj_.count(v) > 0;
}

bool SocialGraph::has_edge(const std::string& u, const std::string& v) const {
  auto it = adj_.find(u);
  return it != adj_.end() && it->second.count(v) > 0;
}

const std::set<std::string>* SocialGraph::neighbors(
    const std::string& v) const {
  auto it = adj_.find(v);
  return it == adj_.end() ? nullptr : &it->second;
}

std::vector<std::pair<std::string, std::string>> SocialGraph::edges_sorted()
    const {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(n_edges_);
  for (const auto& [u, nbrs] : adj_) {
    for (const auto& v : nbrs) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;  // adj_ is an ordered map, so this is already sorted
}

std::vector<std::string> validate_thread(const Thread& t) {
  std::vector<std::string> violations;
  if (t.poster_id.empty()) violations.push_back("poster_id is empty");
  if (t.post_time < 0) violations.push_back("post time is negative");
  for (std::size_t i = 0; i < t.comments.size(); ++i) {
    const Comment& c = t.comments[i];
    const std::string tag = "comment " + std::to_string(i + 1);
    if (c.author_id.empty()) violations.push_back(tag + " has empty author_id");
    if (c.time < t.post_time) violations.push_back(tag + " time < post time");
    if (i > 0 && c.time < t.comments[i - 1].time) {
      violations.push_back(tag + " time < comment " + std::to_string(i) +
                           " time");
    }
    if (c.likes < 0) violations.push_back(tag + " has negative likes");
  }
  return violations;
}

namespace {

std::string field_error(const std::string& path, std::size_t line,
                        const std::string& what) {
  return path + ":" + std::to_string(line) + ": " + what;
}

json must_get(const json& obj, const char* key, const std::string& path,
              std::size_t line) {
  if (!obj.contains(key)) {
    throw std::runtime_error(
        field_error(path, line, std::string("missing field '") + key + "'"));
  }
  return obj.at(key);
}

std::string get_str(const json& obj, const char* key, const std::string& path,
                    std::size_t line) {
  json v = must_get(obj, key, path, line);
  if (!v.is_string()) {
    throw std::runtime_error(
        field_error(path, line, std::string("field '") + key + "' must be a string"));
  }
  return v.get<std::string>();
}

std::int64_t get_int(const json& obj, const char* key, const std::string& path,
                     std::size_t line) {
  json v = must_get(obj, key, path, line);
  if (!v.is_number_integer()) {
    throw std::runtime_error(field_error(
        path, line, std::string("field '") + key + "' must be an integer"));
  }
  return v.get<std::int64_t>();
}

Thread parse_thread_line(const std::string& line, const std::string& path,
                         std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(field_error(path, line_no, e.what()));
  }
  if (!obj.is_object()) {
    throw std::runtime_error(field_error(path, line_no, "not a JSON object"));
  }
  Thread t;
  t.thread_id = get_str(obj, "thread_id", path, line_no);
  t.poster_id = get_str(obj, "poster_id", path, line_no);
  json post = must_get(obj, "post", path, line_no);
  t.post_text = get_str(post, "text", path, line_no);
  t.post_time = get_int(post, "time", path, line_no);
  json comments = must_get(obj, "comments", path, line_no);
  if (!comments.is_array()) {
    throw std::runtime_error(
        field_error(path, line_no, "field 'comments' must be an array"));
  }
  for (const json& jc : comments) {
    Comment c;
    c.author_id = get_str(jc, "author_id", path, line_no);
    c.text = get_str(jc, "text", path, line_no);
    c.time = get_int(jc, "time", path, line_no);
    c.likes = get_int(jc, "likes", path, line_no);
    t.comments.push_back(std::move(c));
  }
  json likes = must_get(obj, "post_likes", path, line_no);
  if (!likes.is_array()) {
    throw std::runtime_error(
        field_error(path, line_no, "field 'post_likes' must be an array"));
  }
  for (const json& jl : likes) {
    Like l;
    l.user_id = get_str(jl, "user_id", path, line_no);
    l.time = get_int(jl, "time", path, line_no);
    t.post_likes.push_back(std::move(l));
  }
  return t;
}

json thread_to_json(const Thread& t) {
  json comments = json::array();
  for (const Comment& c : t.comments) {
    comments.push_back({{"author_id", c.author_id},
                        {"text", c.text},
                        {"time", c.time},
                        {"likes", c.likes}});
  }
  json likes = json::array();
  for (const Like& l : t.post_likes) {
    likes.push_back({{"user_id", l.user_id}, {"time", l.time}});
  }
  return json{{"thread_id", t.thread_id},
              {"poster_id", t.poster_id},
              {"post", {{"text", t.post_text}, {"time", t.post_time}}},
              {"comments", comments},
              {"post_likes", likes}};
}

void check_csv_safe(const std::string& id) {
  if (id.find(',') != std::string::npos ||
      id.find('\n') != std::string::npos ||
      id.find('\r') != std::string::npos) {
    throw std::runtime_error("participant id '" + id +
                             "' contains a comma or newline and cannot be "
                             "written to the edges CSV");
  }
}

}  // namespace

Corpus load_corpus(const std::string& threads_path,
                   const std::string& edges_path) {
  Corpus corpus;
  std::ifstream tf(threads_path);
  if (!tf) throw std::runtime_error("cannot open threads file " + threads_path);
  std::string line;
  std::size_t line_no = 0;
  std::unordered_set<std::string> seen_ids;
  while (std::getline(tf, line)) {
    ++line_no;
    if (line.empty()) continue;
    Thread t = parse_thread_line(line, threads_path, line_no);
    if (!seen_ids.insert(t.thread_id).second) {
      throw std::runtime_error(field_error(
          threads_path, line_no, "duplicate thread_id '" + t.thread_id + "'"));
    }
    auto violations = validate_thread(t);
    if (!violations.empty()) {
      throw std::runtime_error(field_error(
          threads_path, line_no,
          "thread '" + t.thread_id + "': " + violations.front()));
    }
    corpus.threads.push_back(std::move(t));
  }

  std::ifstream ef(edges_path);
  if (!ef) throw std::runtime_error("cannot open edges file " + edges_path);
  line_no = 0;
  while (std::getline(ef, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto parts = split(line, ',');
    if (parts.size() != 2 || parts[0].empty() || parts[1].empty()) {
      throw std::runtime_error(
          field_error(edges_path, line_no, "expected two ids 'u,v'"));
    }
    try {
      corpus.graph.add_edge(parts[0], parts[1]);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(field_error(edges_path, line_no, e.what()));
    }
  }

  // Every participant appearing in a thread is a graph vertex; isolated
  // vertices are fine.
  for (const Thread& t : corpus.threads) {
    corpus.graph.add_vertex(t.poster_id);
    for (const Comment& c : t.comments) corpus.graph.add_vertex(c.author_id);
    for (const Like& l : t.post_likes) corpus.graph.add_vertex(l.user_id);
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& threads_path,
                 const std::string& edges_path) {
  std::ofstream tf(threads_path, std::ios::trunc);
  if (!tf) throw std::runtime_error("cannot write threads file " + threads_path);
  for (const Thread& t : corpus.threads) {
    tf << thread_to_json(t).dump() << '\n';
  }
  if (!tf) throw std::runtime_error("write failed on " + threads_path);

  std::ofstream ef(edges_path, std::ios::trunc);
  if (!ef) throw std::runtime_error("cannot write edges file " + edges_path);
  for (const auto& [u, v] : corpus.graph.edges_sorted()) {
    check_csv_safe(u);
    check_csv_safe(v);
    ef << u << ',' << v << '\n';
  }
  if (!ef) throw std::runtime_error("write failed on " + edges_path);
}

}  // namespace threadlab
