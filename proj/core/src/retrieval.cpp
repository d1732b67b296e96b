#include "rexha/retrieval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <queue>
#include <random>

#include <nlohmann/json.hpp>

#include "rexha/error.hpp"

namespace rexha::retrieval {

using nlohmann::json;

UnitVector UnitVector::normalize(const Vector& raw) {
  UnitVector u;
  const double norm = raw.norm();
  if (!std::isfinite(norm)) throw Error(ErrorKind::kNumeric, "cannot normalize a non-finite vector");
  if (norm == 0.0) {
    u.v_ = Vector::Zero(raw.size());
    u.zero_ = true;
  } else {
    u.v_ = raw / norm;
    u.zero_ = false;
  }
  return u;
}

UnitVector UnitVector::normalize(std::span<const float> raw) {
  Vector v(static_cast<Eigen::Index>(raw.size()));
  for (std::size_t k = 0; k < raw.size(); ++k) v[static_cast<Eigen::Index>(k)] = raw[k];
  return normalize(v);
}

// ---------------------------------------------------------------------------

void VectorIndex::reserve(std::size_t rows) {
  ids_.reserve(rows);
  rows_.reserve(rows * dim_);
  meta_.reserve(rows);
  zero_.reserve(rows);
}

void VectorIndex::add(std::string id, std::span<const float> raw, RowMeta meta) {
  if (raw.size() != dim_) {
    throw Error(ErrorKind::kInvalidArgument,
                "row width " + std::to_string(raw.size()) + " != index width " + std::to_string(dim_));
  }
  const UnitVector u = UnitVector::normalize(raw);
  std::vector<float> unit(dim_);
  for (std::size_t k = 0; k < dim_; ++k) unit[k] = static_cast<float>(u.vector()[static_cast<Eigen::Index>(k)]);
  add_normalized(std::move(id), unit, std::move(meta));
}

void VectorIndex::add_normalized(std::string id, std::span<const float> unit, RowMeta meta) {
  if (unit.size() != dim_) {
    throw Error(ErrorKind::kInvalidArgument,
                "row width " + std::to_string(unit.size()) + " != index width " + std::to_string(dim_));
  }
  double sq = 0.0;
  for (float x : unit) sq += static_cast<double>(x) * x;
  const bool zero = sq == 0.0;
  if (!zero && std::abs(std::sqrt(sq) - 1.0) > 1e-5) {
    throw Error(ErrorKind::kValidation, "row " + id + " is not unit-norm");
  }
  if (by_id_.count(id) != 0) throw Error(ErrorKind::kValidation, "duplicate opinion id " + id);
  const std::size_t r = ids_.size();
  by_id_.emplace(id, r);
  by_pair_[{meta.user_id, meta.item_id}].push_back(r);
  ids_.push_back(std::move(id));
  rows_.insert(rows_.end(), unit.begin(), unit.end());
  meta_.push_back(std::move(meta));
  zero_.push_back(zero ? 1 : 0);
}

std::optional<std::size_t> VectorIndex::find(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::size_t> VectorIndex::rows_for_pair(std::string_view user_id, std::string_view item_id) const {
  const auto it = by_pair_.find(std::pair<std::string, std::string>(user_id, item_id));
  if (it == by_pair_.end()) return {};
  return it->second;
}

UnitVector VectorIndex::unit_row(std::size_t r) const { return UnitVector::normalize(row(r)); }

// ---------------------------------------------------------------------------

std::vector<UnitVector> embed_texts(Embedder& embedder, std::span<const std::string> texts,
                                    const EmbedOptions& options) {
  const std::size_t batch = std::max<std::size_t>(1, options.batch_size);
  std::vector<UnitVector> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += batch) {
    const auto chunk = texts.subspan(start, std::min(batch, texts.size() - start));
    auto vectors = with_retry(options.retry, [&] { return embedder.embed(chunk); }, options.sleep);
    if (vectors.size() != chunk.size()) {
      throw Error(ErrorKind::kValidation, "embedder returned " + std::to_string(vectors.size()) + " vectors for " +
                                              std::to_string(chunk.size()) + " inputs");
    }
    for (const auto& v : vectors) {
      if (v.size() != embedder.dimension()) {
        throw Error(ErrorKind::kValidation, "embedding width drift: got " + std::to_string(v.size()) +
                                                ", expected " + std::to_string(embedder.dimension()));
      }
      out.push_back(UnitVector::normalize(std::span<const float>(v)));
    }
  }
  return out;
}

VectorIndex embed_opinions(Embedder& embedder, std::span<const Document> documents, const EmbedOptions& options) {
  if (documents.empty()) throw Error(ErrorKind::kInvalidArgument, "embed_opinions: no opinions");
  std::vector<std::string> texts;
  texts.reserve(documents.size());
  for (const auto& d : documents) texts.push_back(d.text);
  const auto units = embed_texts(embedder, texts, options);

  VectorIndex index(embedder.dimension());
  index.reserve(documents.size());
  std::vector<float> row(embedder.dimension());
  for (std::size_t k = 0; k < documents.size(); ++k) {
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = static_cast<float>(units[k].vector()[static_cast<Eigen::Index>(c)]);
    index.add_normalized(documents[k].id, row, documents[k].meta);
  }
  return index;
}

VectorIndex embed_opinions(Embedder& embedder, std::span<const profiler::Opinion> opinions,
                           const EmbedOptions& options) {
  std::vector<Document> docs;
  docs.reserve(opinions.size());
  for (const auto& o : opinions) docs.push_back({std::to_string(o.review_id), o.text, {o.user_id, o.item_id}});
  return embed_opinions(embedder, docs, options);
}

Vector latent_query_raw(std::span<const UnitVector> user_vectors, std::span<const UnitVector> item_vectors) {
  auto side_mean = [](std::span<const UnitVector> vs, const char* side) {
    Vector sum;
    std::size_t count = 0;
    for (const auto& v : vs) {
      if (v.is_zero()) continue;
      if (count == 0) sum = Vector::Zero(v.vector().size());
      if (v.vector().size() != sum.size()) throw Error(ErrorKind::kInvalidArgument, "latent query width mismatch");
      sum += v.vector();
      ++count;
    }
    if (count == 0) throw Error(ErrorKind::kInvalidArgument, std::string("latent query: no ") + side + " opinions");
    return Vector(sum / static_cast<double>(count));
  };
  const Vector qu = side_mean(user_vectors, "user");
  const Vector qv = side_mean(item_vectors, "item");
  if (qu.size() != qv.size()) throw Error(ErrorKind::kInvalidArgument, "latent query width mismatch");
  return (qu + qv) / 2.0;
}

UnitVector latent_query(std::span<const UnitVector> user_vectors, std::span<const UnitVector> item_vectors) {
  return UnitVector::normalize(latent_query_raw(user_vectors, item_vectors));
}

// ---------------------------------------------------------------------------

AdapterParams AdapterParams::identity(std::size_t dimension) {
  const auto d = static_cast<Eigen::Index>(dimension);
  return AdapterParams{RowMatrix::Identity(d, d), Vector::Zero(d)};
}

void AdapterParams::validate() const {
  if (weight.rows() != bias.size() || weight.cols() != bias.size()) {
    throw Error(ErrorKind::kInvalidArgument, "adapter must be square with matching bias");
  }
  if (!weight.allFinite() || !bias.allFinite()) throw Error(ErrorKind::kNumeric, "adapter has NaN/Inf");
}

std::string AdapterParams::to_json() const {
  json j;
  j["dimension"] = dimension();
  j["weight"] = std::vector<double>(weight.data(), weight.data() + weight.size());
  j["bias"] = std::vector<double>(bias.data(), bias.data() + bias.size());
  return j.dump();
}

AdapterParams AdapterParams::from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    const auto d = j.at("dimension").get<std::size_t>();
    const auto w = j.at("weight").get<std::vector<double>>();
    const auto b = j.at("bias").get<std::vector<double>>();
    if (w.size() != d * d || b.size() != d) throw Error(ErrorKind::kParse, "adapter JSON has inconsistent sizes");
    AdapterParams a = identity(d);
    std::copy(w.begin(), w.end(), a.weight.data());
    std::copy(b.begin(), b.end(), a.bias.data());
    a.validate();
    return a;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("bad adapter JSON: ") + e.what());
  }
}

VectorIndex adapt_index(const VectorIndex& base, const AdapterParams& adapter) {
  if (adapter.dimension() != base.dimension()) throw Error(ErrorKind::kInvalidArgument, "adapter width != index width");
  VectorIndex out(base.dimension());
  out.reserve(base.size());
  std::vector<float> row(base.dimension());
  for (std::size_t r = 0; r < base.size(); ++r) {
    if (base.is_zero(r)) {
      std::fill(row.begin(), row.end(), 0.0f);
    } else {
      const UnitVector u = adapter.apply(base.unit_row(r));
      for (std::size_t c = 0; c < row.size(); ++c) row[c] = static_cast<float>(u.vector()[static_cast<Eigen::Index>(c)]);
    }
    out.add_normalized(base.id(r), row, base.meta(r));
  }
  return out;
}

std::string_view to_string(ContrastiveForm form) noexcept {
  return form == ContrastiveForm::kAsPrinted ? "as_printed" : "anchor_vs_all";
}

ContrastiveForm parse_contrastive_form(std::string_view name) {
  if (name == "as_printed") return ContrastiveForm::kAsPrinted;
  if (name == "anchor_vs_all") return ContrastiveForm::kAnchorVsAll;
  throw Error(ErrorKind::kInvalidArgument, "unknown contrastive form: " + std::string(name));
}

namespace {

double log_sum_exp(const Vector& x) {
  const double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

Vector softmax(const Vector& x) {
  const Vector e = (x.array() - x.maxCoeff()).exp();
  return e / e.sum();
}

// Loss and dL/dS for a similarity matrix S (anchors x opinions).
double info_nce(const RowMatrix& sim, double tau, ContrastiveForm form, RowMatrix* grad) {
  const Eigen::Index n = sim.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  if (grad != nullptr) *grad = RowMatrix::Zero(n, n);
  double loss = 0.0;
  if (form == ContrastiveForm::kAsPrinted) {
    const Vector diag = sim.diagonal() / tau;
    const double lse = log_sum_exp(diag);
    loss = lse - diag.mean();
    if (grad != nullptr) {
      const Vector sm = softmax(diag);
      for (Eigen::Index j = 0; j < n; ++j) (*grad)(j, j) = (sm[j] - inv_n) / tau;
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector row = sim.row(i).transpose() / tau;
      loss += (log_sum_exp(row) - row[i]) * inv_n;
      if (grad != nullptr) {
        Vector sm = softmax(row);
        sm[i] -= 1.0;
        grad->row(i) = sm.transpose() * (inv_n / tau);
      }
    }
  }
  return loss;
}

void check_batch(std::size_t anchors, std::size_t positives, double tau) {
  if (anchors != positives) throw Error(ErrorKind::kInvalidArgument, "anchor and positive counts differ");
  if (anchors < 2) throw Error(ErrorKind::kInvalidArgument, "contrastive loss needs a batch of at least 2");
  if (!(tau > 0.0)) throw Error(ErrorKind::kInvalidArgument, "temperature must be > 0");
}

}  // namespace

double contrastive_loss(std::span<const UnitVector> anchors, std::span<const UnitVector> positives,
                        double temperature, ContrastiveForm form) {
  check_batch(anchors.size(), positives.size(), temperature);
  const auto n = static_cast<Eigen::Index>(anchors.size());
  RowMatrix sim(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      // Only the diagonal is needed for the printed form.
      sim(i, j) = (form == ContrastiveForm::kAnchorVsAll || i == j) ? anchors[i].dot(positives[j]) : 0.0;
    }
  }
  return info_nce(sim, temperature, form, nullptr);
}

ContrastiveGradient contrastive_gradient(const AdapterParams& adapter, const RowMatrix& profile_base,
                                         const RowMatrix& opinion_base, double temperature, ContrastiveForm form) {
  check_batch(static_cast<std::size_t>(profile_base.rows()), static_cast<std::size_t>(opinion_base.rows()), temperature);
  if (profile_base.cols() != static_cast<Eigen::Index>(adapter.dimension()) ||
      opinion_base.cols() != profile_base.cols()) {
    throw Error(ErrorKind::kInvalidArgument, "contrastive batch width != adapter width");
  }

  // Adapter output before and after normalization for both sides.
  RowMatrix zp = profile_base * adapter.weight.transpose();
  zp.rowwise() += adapter.bias.transpose();
  RowMatrix zr = opinion_base * adapter.weight.transpose();
  zr.rowwise() += adapter.bias.transpose();
  const Vector np = zp.rowwise().norm();
  const Vector nr = zr.rowwise().norm();
  if ((np.array() == 0.0).any() || (nr.array() == 0.0).any()) {
    throw Error(ErrorKind::kNumeric, "adapter maps an input to the zero vector");
  }
  const RowMatrix p = np.cwiseInverse().asDiagonal() * zp;
  const RowMatrix r = nr.cwiseInverse().asDiagonal() * zr;

  const RowMatrix sim = p * r.transpose();
  RowMatrix g_sim;
  ContrastiveGradient out;
  out.loss = info_nce(sim, temperature, form, &g_sim);

  const RowMatrix g_p = g_sim * r;
  const RowMatrix g_r = g_sim.transpose() * p;
  auto through_norm = [](const RowMatrix& unit, const Vector& norms, const RowMatrix& g) {
    RowMatrix gz(g.rows(), g.cols());
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      gz.row(i) = (g.row(i) - unit.row(i) * unit.row(i).dot(g.row(i))) / norms[i];
    }
    return gz;
  };
  const RowMatrix gz_p = through_norm(p, np, g_p);
  const RowMatrix gz_r = through_norm(r, nr, g_r);
  out.weight = gz_p.transpose() * profile_base + gz_r.transpose() * opinion_base;
  out.bias = (gz_p.colwise().sum() + gz_r.colwise().sum()).transpose();
  return out;
}

void ContrastiveConfig::validate() const {
  if (!(temperature > 0.0)) throw Error(ErrorKind::kInvalidArgument, "temperature must be > 0");
  if (batch_size < 2) throw Error(ErrorKind::kInvalidArgument, "contrastive batch size must be >= 2");
  if (!(learning_rate >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "learning rate must be >= 0");
}

AdapterFit fit_adapter(const RowMatrix& profile_base, const RowMatrix& opinion_base, const ContrastiveConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(profile_base.rows());
  if (n < 2) throw Error(ErrorKind::kInvalidArgument, "fit_adapter needs at least 2 pairs");
  if (opinion_base.rows() != profile_base.rows() || opinion_base.cols() != profile_base.cols()) {
    throw Error(ErrorKind::kInvalidArgument, "profile and opinion matrices differ in shape");
  }

  AdapterFit fit;
  fit.params = AdapterParams::identity(static_cast<std::size_t>(profile_base.cols()));
  fit.initial_loss = contrastive_gradient(fit.params, profile_base, opinion_base, config.temperature, config.form).loss;

  const std::size_t batch = std::min(config.batch_size, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);
  std::size_t cursor = n;  // forces a shuffle on the first step
  RowMatrix pb(static_cast<Eigen::Index>(batch), profile_base.cols());
  RowMatrix ob(static_cast<Eigen::Index>(batch), opinion_base.cols());

  for (std::size_t step = 0; step < config.steps; ++step) {
    if (batch < n) {
      if (cursor + batch > n) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      for (std::size_t b = 0; b < batch; ++b) {
        pb.row(static_cast<Eigen::Index>(b)) = profile_base.row(static_cast<Eigen::Index>(order[cursor + b]));
        ob.row(static_cast<Eigen::Index>(b)) = opinion_base.row(static_cast<Eigen::Index>(order[cursor + b]));
      }
      cursor += batch;
    }
    const ContrastiveGradient g = batch < n
                                      ? contrastive_gradient(fit.params, pb, ob, config.temperature, config.form)
                                      : contrastive_gradient(fit.params, profile_base, opinion_base,
                                                             config.temperature, config.form);
    if (!std::isfinite(g.loss)) {
      throw Error(ErrorKind::kNumeric, "non-finite contrastive loss at step " + std::to_string(step));
    }
    fit.step_losses.push_back(g.loss);
    if (config.learning_rate == 0.0) continue;
    fit.params.weight -= config.learning_rate * g.weight;
    fit.params.bias -= config.learning_rate * g.bias;
  }
  fit.final_loss = contrastive_gradient(fit.params, profile_base, opinion_base, config.temperature, config.form).loss;
  if (!std::isfinite(fit.final_loss)) throw Error(ErrorKind::kNumeric, "non-finite contrastive loss after training");
  return fit;
}

AdapterFit fit_adapter(std::span<const std::pair<std::string, std::string>> pairs, Embedder& base,
                       const ContrastiveConfig& config, const EmbedOptions& embed) {
  if (pairs.size() < 2) throw Error(ErrorKind::kInvalidArgument, "fit_adapter needs at least 2 pairs");
  std::vector<std::string> profiles;
  std::vector<std::string> opinions;
  for (const auto& [p, o] : pairs) {
    profiles.push_back(p);
    opinions.push_back(o);
  }
  const auto pv = embed_texts(base, profiles, embed);
  const auto ov = embed_texts(base, opinions, embed);
  const auto n = static_cast<Eigen::Index>(pairs.size());
  const auto d = static_cast<Eigen::Index>(base.dimension());
  RowMatrix pm(n, d);
  RowMatrix om(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    pm.row(i) = pv[static_cast<std::size_t>(i)].vector().transpose();
    om.row(i) = ov[static_cast<std::size_t>(i)].vector().transpose();
  }
  return fit_adapter(pm, om, config);
}

std::string profile_query_text(const profiler::Profile& user_profile, const profiler::Profile& item_profile) {
  return user_profile.text + "\n\n" + item_profile.text;
}

UnitVector profile_query(const AdapterParams& adapter, Embedder& base, const profiler::Profile& user_profile,
                         const profiler::Profile& item_profile, const EmbedOptions& embed) {
  if (user_profile.text.empty() || item_profile.text.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "profile query needs non-empty user and item profiles");
  }
  const std::string text[1] = {profile_query_text(user_profile, item_profile)};
  const auto base_vec = embed_texts(base, text, embed);
  return adapter.apply(base_vec.front());
}

// ---------------------------------------------------------------------------

namespace {

struct Scored {
  double score;
  std::size_t row;
};

}  // namespace

RetrievalResult retrieve_top_q(const VectorIndex& index, const UnitVector& query, std::size_t q,
                               const std::set<PairKey>& exclude, std::string query_id) {
  if (q == 0) throw Error(ErrorKind::kInvalidArgument, "top_q must be >= 1");
  if (query.size() != index.dimension()) throw Error(ErrorKind::kInvalidArgument, "query width != index width");

  std::vector<unsigned char> excluded;
  if (!exclude.empty()) {
    excluded.assign(index.size(), 0);
    for (const auto& [user, item] : exclude) {
      for (auto r : index.rows_for_pair(user, item)) excluded[r] = 1;
    }
  }

  // "better" ordering: higher score, then smaller id. The heap keeps the
  // worst retained candidate on top.
  const auto better = [&index](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return index.id(a.row) < index.id(b.row);
  };
  std::priority_queue<Scored, std::vector<Scored>, decltype(better)> heap(better);

  const double* qv = query.vector().data();
  const std::size_t dim = index.dimension();
  if (!query.is_zero()) {
    for (std::size_t r = 0; r < index.size(); ++r) {
      if (index.is_zero(r) || (!excluded.empty() && excluded[r] != 0)) continue;
      const float* row = index.row(r).data();
      double dot = 0.0;
      for (std::size_t k = 0; k < dim; ++k) dot += static_cast<double>(row[k]) * qv[k];
      const Scored s{std::clamp(dot, -1.0, 1.0), r};
      if (heap.size() < q) {
        heap.push(s);
      } else if (better(s, heap.top())) {
        heap.pop();
        heap.push(s);
      }
    }
  }

  std::vector<Scored> kept;
  kept.reserve(heap.size());
  while (!heap.empty()) {
    kept.push_back(heap.top());
    heap.pop();
  }
  std::sort(kept.begin(), kept.end(), better);

  RetrievalResult result;
  result.query_id = std::move(query_id);
  result.requested = q;
  for (const auto& s : kept) result.hits.push_back({index.id(s.row), s.score});
  return result;
}

RowMatrix retrieved_set_similarity(const VectorIndex& index, const RetrievalResult& result) {
  const auto n = static_cast<Eigen::Index>(result.hits.size());
  std::vector<UnitVector> rows;
  for (const auto& h : result.hits) {
    const auto r = index.find(h.id);
    if (!r) throw Error(ErrorKind::kNotFound, "retrieved id not in index: " + h.id);
    rows.push_back(index.unit_row(*r));
  }
  RowMatrix sim(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sim(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double s = std::clamp(rows[static_cast<std::size_t>(i)].dot(rows[static_cast<std::size_t>(j)]), -1.0, 1.0);
      sim(i, j) = s;
      sim(j, i) = s;
    }
  }
  return sim;
}

double mean_off_diagonal(const RowMatrix& similarity) {
  const Eigen::Index n = similarity.rows();
  if (n < 2) throw Error(ErrorKind::kInvalidArgument, "need at least 2 retrieved rows");
  return (similarity.sum() - similarity.trace()) / static_cast<double>(n * (n - 1));
}

std::string LatencyReport::to_json() const {
  return json{{"p50_ms", p50_ms},       {"p95_ms", p95_ms}, {"p99_ms", p99_ms},   {"mean_ms", mean_ms},
              {"rows", rows},           {"dim", dimension}, {"queries", queries}, {"top_q", top_q},
              {"threads", threads}}
      .dump(2);
}

LatencyReport bench_retrieval(const VectorIndex& index, std::span<const UnitVector> queries, std::size_t q) {
  if (queries.empty()) throw Error(ErrorKind::kInvalidArgument, "bench_retrieval: no queries");
  std::vector<double> ms;
  ms.reserve(queries.size());
  std::size_t sink = 0;
  for (const auto& query : queries) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = retrieve_top_q(index, query, q);
    const auto t1 = std::chrono::steady_clock::now();
    sink += res.hits.size();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  LatencyReport rep;
  rep.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
  std::sort(ms.begin(), ms.end());
  // Nearest-rank percentile.
  auto pct = [&ms](double p) {
    const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(ms.size())));
    return ms[std::clamp<std::size_t>(rank, 1, ms.size()) - 1];
  };
  rep.p50_ms = pct(0.50);
  rep.p95_ms = pct(0.95);
  rep.p99_ms = pct(0.99);
  rep.rows = index.size();
  rep.dimension = index.dimension();
  rep.queries = queries.size() + (sink == static_cast<std::size_t>(-1) ? 1 : 0);
  rep.top_q = q;
  rep.threads = 1;
  return rep;
}

VectorIndex random_index(std::size_t rows, std::size_t dimension, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  VectorIndex index(dimension);
  index.reserve(rows);
  std::vector<float> raw(dimension);
  for (std::size_t r = 0; r < rows; ++r) {
    for (auto& x : raw) x = normal(rng);
    index.add(std::to_string(r), raw, RowMeta{"u" + std::to_string(r % 997), "i" + std::to_string(r)});
  }
  return index;
}

std::vector<UnitVector> random_queries(std::size_t count, std::size_t dimension, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<UnitVector> out;
  out.reserve(count);
  Vector v(static_cast<Eigen::Index>(dimension));
  for (std::size_t i = 0; i < count; ++i) {
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = normal(rng);
    out.push_back(UnitVector::normalize(v));
  }
  return out;
}

}  // namespace rexha::retrieval
