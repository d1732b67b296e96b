#pragma once

#include <filesystem>
#include <string>

#include "rexha/config.hpp"
#include "rexha/corpus.hpp"

namespace fixture {

inline std::filesystem::path source_dir() { return REXHA_SOURCE_DIR; }

// 8 users x 8 items, each user reviewing 5 consecutive items. Every review
// carries a distinct explanation.
inline rexha::corpus::Dataset ring_corpus(std::size_t users = 8, std::size_t per_user = 5) {
  std::vector<rexha::corpus::Review> rs;
  rexha::corpus::ReviewId id = 1;
  for (std::size_t u = 0; u < users; ++u) {
    for (std::size_t k = 0; k < per_user; ++k) {
      const std::size_t i = (u + k) % users;
      const std::string us = "u" + std::to_string(u), is = "i" + std::to_string(i);
      rs.push_back({id++, us, is,
                    "Review by " + us + " of " + is + " is upbeat. It mentions topic " + std::to_string((u * i) % 5) +
                        " and more.",
                    "Because " + us + " likes " + is + " for reason " + std::to_string(u * 31 + i) + "."});
    }
  }
  return rexha::corpus::Dataset::from_reviews(std::move(rs));
}

// Small, fast settings with the repository templates and mock ports.
inline rexha::pipeline::PipelineConfig small_config(const std::filesystem::path& reviews,
                                                    const std::filesystem::path& run_dir) {
  rexha::pipeline::PipelineConfig c;
  const auto t = source_dir() / "templates";
  c.data.reviews = reviews.string();
  c.run.dir = run_dir.string();
  c.profiler.opinion_template = (t / "summarize_review.txt").string();
  c.profiler.user_template = (t / "summarize_user.txt").string();
  c.profiler.item_template = (t / "summarize_item.txt").string();
  c.generator.prompt_template = (t / "generate.txt").string();
  c.eval.judge_template = (t / "judge.txt").string();
  c.gcn.d_gcn = 8;
  c.gcn.hidden = 16;
  c.gcn.d_llm = 8;
  c.gcn.vocab_size = 64;
  c.gcn.steps = 10;
  c.gcn.learning_rate = 0.05;
  c.ports.embed_dim = 32;
  c.retrieval.query_type = "profile";  // exercises every stage
  c.retrieval.top_q = 3;
  c.retrieval.adapter_steps = 20;
  return c;
}

}  // namespace fixture
