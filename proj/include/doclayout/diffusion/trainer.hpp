#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "doclayout/diffusion/model.hpp"

namespace doclayout::diffusion {

struct TrainConfig {
  ModelConfig model;
  double lr = 1e-4;
  int batch = 32;
  int max_steps = 2000;  // optimizer iterations
  std::uint64_t seed = 0;
  double grad_clip = 1.0;  // <= 0 disables clipping

  void validate() const;
};

struct LossRecord {
  int step = 0;
  double loss = 0.0;
  double mse = 0.0;
  double round = 0.0;
};

struct TokenizedCorpus {
  std::vector<int> tokens;  // row-major, one padded sequence per row
  int sequences = 0;
  int skipped_too_long = 0;
};

// Quantizes and pads every layout; layouts with more than max_boxes elements
// are skipped and counted.
TokenizedCorpus tokenize_corpus(const std::vector<core::Layout>& corpus,
                                const core::Vocabulary& vocab, int max_boxes);

struct TrainResult {
  Denoiser model;
  std::vector<LossRecord> log;
  int skipped_too_long = 0;
};

// Deterministic for a fixed seed. Throws NumericalError if the loss diverges.
TrainResult train(const std::vector<core::Layout>& corpus, const TrainConfig& cfg);

void write_loss_csv(std::ostream& out, const std::vector<LossRecord>& log);

struct SampleOptions {
  int count = 0;
  std::uint64_t seed = 0;
  bool clamp = true;  // snap each predicted x0 to its nearest embedding row
  int threads = 0;    // 0 = hardware concurrency
};

struct SampleResult {
  std::vector<core::Layout> layouts;
  std::vector<core::TokenSequence> sequences;  // raw rounded tokens
  int valid = 0;  // sequences that needed no repair
  int dropped_groups = 0;

  double validity_rate() const {
    return sequences.empty() ? 0.0 : static_cast<double>(valid) / sequences.size();
  }
};

// Runs the reverse chain from x_T ~ N(0, I). Sequence i draws its noise from
// a stream derived from (seed, i), so results do not depend on threading.
SampleResult sample(const Denoiser& model, const SampleOptions& opts);

void save_checkpoint(const Denoiser& model, std::ostream& out);
void save_checkpoint_file(const Denoiser& model, const std::string& path);
Denoiser load_checkpoint(std::istream& in);
Denoiser load_checkpoint_file(const std::string& path);

}  // namespace doclayout::diffusion
