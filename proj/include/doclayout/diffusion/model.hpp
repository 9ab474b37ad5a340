#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "doclayout/core/layout.hpp"
#include "doclayout/core/tokens.hpp"
#include "doclayout/diffusion/nn.hpp"
#include "doclayout/diffusion/schedule.hpp"

namespace doclayout::diffusion {

using nn::Mat;

struct ModelConfig {
  int grid = core::kDefaultGridSize;
  int max_boxes = 25;  // sequence length 5 * max_boxes + 2
  int dim = 32;        // embedding width d
  int width = 128;
  int layers = 4;
  int heads = 4;
  int ffn_mult = 4;
  int steps = 2000;  // diffusion steps T
  ScheduleKind schedule = ScheduleKind::kSqrt;

  int seq_len() const { return core::kTokensPerElement * max_boxes + 2; }
  void validate() const;
};

// Embedding table, tied rounding head and the x0-predicting transformer.
class Denoiser {
 public:
  struct LossTerms {
    double loss = 0.0;
    double mse = 0.0;    // predicted x0 vs clean embedding, plus the x_T prior term
    double round = 0.0;  // cross-entropy of the rounding head on clean embeddings
  };

  Denoiser(ModelConfig cfg, core::SchemaPtr schema, core::PageSize page);

  void init(std::uint64_t seed);

  const ModelConfig& config() const noexcept { return cfg_; }
  const core::Vocabulary& vocab() const noexcept { return vocab_; }
  const core::SchemaPtr& schema() const noexcept { return schema_; }
  core::PageSize page() const noexcept { return page_; }
  const NoiseSchedule& schedule() const noexcept { return schedule_; }

  // Row-stacked latents: sequence b occupies rows [b*L, (b+1)*L).
  Mat embed(const std::vector<int>& tokens) const;
  // Argmax of x0 E^T + bias per row.
  std::vector<int> round(const Mat& x0) const;
  Mat logits(const Mat& x0) const;

  // Prediction of x0 from x_t; one diffusion step per sequence.
  Mat predict_x0(const Mat& x_t, const std::vector<int>& steps) const;

  // Loss at fixed steps and noise (rows of `noise` match the latent). Gradients
  // are accumulated into the parameters.
  LossTerms loss_and_grad(const std::vector<int>& tokens, const std::vector<int>& steps,
                          const Mat& noise);

  nn::ParamList params();
  std::vector<const nn::Param*> params() const;
  std::size_t parameter_count();

 private:
  struct Cache;
  Mat forward(const Mat& x_t, const std::vector<int>& steps, Cache* cache) const;
  Mat time_features(const std::vector<int>& steps) const;

  ModelConfig cfg_;
  core::SchemaPtr schema_;
  core::PageSize page_;
  core::Vocabulary vocab_;
  NoiseSchedule schedule_;

  nn::Param embedding_;   // |V| x d
  nn::Param round_bias_;  // 1 x |V|
  nn::Linear in_proj_;
  nn::Param position_;    // L x width
  nn::Linear time_proj_;
  std::vector<nn::TransformerBlock> blocks_;
  nn::LayerNorm final_norm_;
  nn::Linear out_proj_;
};

}  // namespace doclayout::diffusion
