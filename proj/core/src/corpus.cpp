#include "rexha/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "rexha/error.hpp"
#include "rexha/text.hpp"

namespace rexha::corpus {

using nlohmann::json;

namespace {

[[noreturn]] void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

std::string line_prefix(std::size_t line) { return "line " + std::to_string(line) + ": "; }

std::string required_string(const json& rec, const char* field, std::size_t line) {
  const auto it = rec.find(field);
  if (it == rec.end() || it->is_null()) {
    fail(ErrorKind::kParse, line_prefix(line) + "missing required field '" + field + "'");
  }
  if (!it->is_string()) {
    fail(ErrorKind::kParse, line_prefix(line) + "field '" + field + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

Dataset Dataset::from_reviews(std::vector<Review> reviews, DuplicatePolicy duplicates) {
  if (reviews.empty()) fail(ErrorKind::kValidation, "empty dataset");

  std::map<std::pair<std::string, std::string>, std::size_t> latest;
  std::vector<bool> keep(reviews.size(), true);
  std::set<ReviewId> ids;
  for (std::size_t pos = 0; pos < reviews.size(); ++pos) {
    const Review& r = reviews[pos];
    const std::string where = "review " + std::to_string(r.id) + ": ";
    if (r.user_id.empty()) fail(ErrorKind::kValidation, where + "empty user_id");
    if (r.item_id.empty()) fail(ErrorKind::kValidation, where + "empty item_id");
    if (text::is_blank(r.text)) fail(ErrorKind::kValidation, where + "review text is blank");
    if (!ids.insert(r.id).second) fail(ErrorKind::kValidation, where + "duplicate review id");

    auto [it, inserted] = latest.try_emplace({r.user_id, r.item_id}, pos);
    if (!inserted) {
      if (duplicates == DuplicatePolicy::kReject) {
        fail(ErrorKind::kValidation, where + "duplicate (user_id, item_id) pair (" +
                                         r.user_id + ", " + r.item_id + ")");
      }
      keep[it->second] = false;
      it->second = pos;
    }
  }

  Dataset ds;
  ds.reviews_.reserve(reviews.size());
  for (std::size_t pos = 0; pos < reviews.size(); ++pos) {
    if (keep[pos]) ds.reviews_.push_back(std::move(reviews[pos]));
  }
  for (std::size_t pos = 0; pos < ds.reviews_.size(); ++pos) {
    const Review& r = ds.reviews_[pos];
    ds.user_index_[r.user_id].push_back(pos);
    ds.item_index_[r.item_id].push_back(pos);
    ds.by_id_.emplace(r.id, pos);
  }
  return ds;
}

bool Dataset::has_user(std::string_view user_id) const {
  return user_index_.find(user_id) != user_index_.end();
}

bool Dataset::has_item(std::string_view item_id) const {
  return item_index_.find(item_id) != item_index_.end();
}

std::vector<const Review*> Dataset::reviews_of_user(std::string_view user_id) const {
  const auto it = user_index_.find(user_id);
  if (it == user_index_.end()) fail(ErrorKind::kNotFound, "unknown user: " + std::string(user_id));
  std::vector<const Review*> out;
  for (auto pos : it->second) out.push_back(&reviews_[pos]);
  return out;
}

std::vector<const Review*> Dataset::reviews_of_item(std::string_view item_id) const {
  const auto it = item_index_.find(item_id);
  if (it == item_index_.end()) fail(ErrorKind::kNotFound, "unknown item: " + std::string(item_id));
  std::vector<const Review*> out;
  for (auto pos : it->second) out.push_back(&reviews_[pos]);
  return out;
}

const Review* Dataset::find(ReviewId id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &reviews_[it->second];
}

Dataset parse_reviews(std::istream& in, const LoadOptions& options) {
  std::vector<Review> reviews;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorKind::kParse, line_prefix(line_no) + "malformed JSON (" + e.what() + ")");
    }
    if (!rec.is_object()) fail(ErrorKind::kParse, line_prefix(line_no) + "expected a JSON object");

    Review r;
    r.id = line_no;
    if (const auto it = rec.find("review_id"); it != rec.end()) {
      if (!it->is_number_unsigned()) {
        fail(ErrorKind::kParse, line_prefix(line_no) + "field 'review_id' must be an unsigned integer");
      }
      r.id = it->get<ReviewId>();
    }
    r.user_id = required_string(rec, "user_id", line_no);
    r.item_id = required_string(rec, "item_id", line_no);
    r.text = required_string(rec, "review", line_no);
    if (text::is_blank(r.text)) fail(ErrorKind::kParse, line_prefix(line_no) + "field 'review' is blank");
    if (const auto it = rec.find("explanation"); it != rec.end() && !it->is_null()) {
      if (!it->is_string()) {
        fail(ErrorKind::kParse, line_prefix(line_no) + "field 'explanation' must be a string");
      }
      r.explanation = it->get<std::string>();
    }
    reviews.push_back(std::move(r));
  }
  return Dataset::from_reviews(std::move(reviews), options.duplicates);
}

Dataset load_reviews(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  return parse_reviews(in, options);
}

void write_reviews(const Dataset& dataset, std::ostream& out) {
  for (const Review& r : dataset.reviews()) {
    json rec = {{"review_id", r.id}, {"user_id", r.user_id}, {"item_id", r.item_id}, {"review", r.text}};
    if (r.explanation) rec["explanation"] = *r.explanation;
    out << rec.dump() << '\n';
  }
}

void write_reviews(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  write_reviews(dataset, out);
}

// ---------------------------------------------------------------------------

InteractionGraph InteractionGraph::from_edges(std::size_t num_users, std::size_t num_items,
                                              std::span<const Edge> edges) {
  std::vector<Edge> sorted(edges.begin(), edges.end());
  for (const auto& [u, i] : sorted) {
    if (u >= num_users || i >= num_items) {
      fail(ErrorKind::kInvalidArgument, "edge endpoint out of range");
    }
  }
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  InteractionGraph g;
  g.user_offsets_.assign(num_users + 1, 0);
  g.item_offsets_.assign(num_items + 1, 0);
  for (const auto& [u, i] : sorted) {
    ++g.user_offsets_[u + 1];
    ++g.item_offsets_[i + 1];
  }
  std::partial_sum(g.user_offsets_.begin(), g.user_offsets_.end(), g.user_offsets_.begin());
  std::partial_sum(g.item_offsets_.begin(), g.item_offsets_.end(), g.item_offsets_.begin());

  g.user_adj_.resize(sorted.size());
  g.item_adj_.resize(sorted.size());
  std::vector<std::size_t> ufill(g.user_offsets_.begin(), g.user_offsets_.end() - 1);
  std::vector<std::size_t> ifill(g.item_offsets_.begin(), g.item_offsets_.end() - 1);
  // Edges are sorted by (user, item), so both adjacency lists come out sorted.
  for (const auto& [u, i] : sorted) {
    g.user_adj_[ufill[u]++] = i;
    g.item_adj_[ifill[i]++] = u;
  }
  return g;
}

std::span<const std::uint32_t> InteractionGraph::items_of(std::uint32_t user) const {
  return {user_adj_.data() + user_offsets_.at(user), user_adj_.data() + user_offsets_.at(user + 1)};
}

std::span<const std::uint32_t> InteractionGraph::users_of(std::uint32_t item) const {
  return {item_adj_.data() + item_offsets_.at(item), item_adj_.data() + item_offsets_.at(item + 1)};
}

std::vector<InteractionGraph::Edge> InteractionGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (std::uint32_t u = 0; u < num_users(); ++u) {
    for (auto i : items_of(u)) out.emplace_back(u, i);
  }
  return out;
}

std::optional<std::uint32_t> InteractionGraph::user_ordinal(std::string_view user_id) const {
  const auto it = std::lower_bound(user_ids_.begin(), user_ids_.end(), user_id);
  if (it == user_ids_.end() || *it != user_id) return std::nullopt;
  return static_cast<std::uint32_t>(it - user_ids_.begin());
}

std::optional<std::uint32_t> InteractionGraph::item_ordinal(std::string_view item_id) const {
  const auto it = std::lower_bound(item_ids_.begin(), item_ids_.end(), item_id);
  if (it == item_ids_.end() || *it != item_id) return std::nullopt;
  return static_cast<std::uint32_t>(it - item_ids_.begin());
}

void InteractionGraph::validate() const {
  for (std::uint32_t u = 0; u < num_users(); ++u) {
    if (user_degree(u) == 0) fail(ErrorKind::kValidation, "user node " + std::to_string(u) + " has degree 0");
    for (auto i : items_of(u)) {
      const auto back = users_of(i);
      if (!std::binary_search(back.begin(), back.end(), u)) {
        fail(ErrorKind::kValidation, "adjacency is not symmetric");
      }
    }
  }
  for (std::uint32_t i = 0; i < num_items(); ++i) {
    if (item_degree(i) == 0) fail(ErrorKind::kValidation, "item node " + std::to_string(i) + " has degree 0");
  }
}

InteractionGraph build_interaction_graph(const Dataset& dataset) {
  if (dataset.empty()) fail(ErrorKind::kValidation, "empty dataset");
  std::vector<std::string> users;
  std::vector<std::string> items;
  for (const auto& [id, _] : dataset.user_index()) users.push_back(id);
  for (const auto& [id, _] : dataset.item_index()) items.push_back(id);

  std::vector<InteractionGraph::Edge> edges;
  edges.reserve(dataset.size());
  for (const Review& r : dataset.reviews()) {
    const auto u = std::lower_bound(users.begin(), users.end(), r.user_id) - users.begin();
    const auto i = std::lower_bound(items.begin(), items.end(), r.item_id) - items.begin();
    edges.emplace_back(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(i));
  }
  InteractionGraph g = InteractionGraph::from_edges(users.size(), items.size(), edges);
  g.user_ids_ = std::move(users);
  g.item_ids_ = std::move(items);
  return g;
}

// ---------------------------------------------------------------------------

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    fail(ErrorKind::kInvalidArgument, "train fraction must lie strictly between 0 and 1");
  }
}

Split split(const Dataset& dataset, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = dataset.size();
  const auto rounded = static_cast<std::size_t>(std::llround((1.0 - spec.train_fraction) * static_cast<double>(n)));
  const std::size_t test_size = std::max<std::size_t>(1, rounded);
  if (test_size >= n) {
    fail(ErrorKind::kInvalidArgument,
         "split leaves the train partition empty (n=" + std::to_string(n) + ", test=" + std::to_string(test_size) + ")");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> in_test(n, false);
  for (std::size_t k = 0; k < test_size; ++k) in_test[order[k]] = true;

  std::vector<Review> train;
  std::vector<Review> test;
  const auto all = dataset.reviews();
  for (std::size_t pos = 0; pos < n; ++pos) (in_test[pos] ? test : train).push_back(all[pos]);
  return Split{Dataset::from_reviews(std::move(train)), Dataset::from_reviews(std::move(test))};
}

std::string split_manifest_json(const SplitSpec& spec, const Split& parts) {
  json j;
  j["seed"] = spec.seed;
  j["train"] = json::array();
  j["test"] = json::array();
  for (const auto& r : parts.train.reviews()) j["train"].push_back(r.id);
  for (const auto& r : parts.test.reviews()) j["test"].push_back(r.id);
  return j.dump(2) + "\n";
}

}  // namespace rexha::corpus
