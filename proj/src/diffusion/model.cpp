#include "doclayout/diffusion/model.hpp"

#include <cmath>
#include <random>

namespace doclayout::diffusion {

void ModelConfig::validate() const {
  if (grid < 2) throw ValidationError("grid must be >= 2");
  if (max_boxes < 1) throw ValidationError("max_boxes must be >= 1");
  if (dim < 8) throw ValidationError("embedding dimension must be >= 8");
  if (width < 1 || heads < 1 || width % heads != 0) {
    throw ValidationError("width must be a positive multiple of heads");
  }
  if (layers < 0 || ffn_mult < 1) throw ValidationError("invalid transformer shape");
  if (steps < 1) throw ValidationError("diffusion steps T must be >= 1");
}

struct Denoiser::Cache {
  Mat x_t;
  std::vector<nn::TransformerBlock::Cache> blocks;
  nn::LayerNorm::Cache final_norm;
  Mat normed;
  Mat time_features;
};

Denoiser::Denoiser(ModelConfig cfg, core::SchemaPtr schema, core::PageSize page)
    : cfg_(cfg),
      schema_(std::move(schema)),
      page_(page),
      vocab_(cfg.grid, schema_ ? schema_->size() : 0),
      schedule_(NoiseSchedule::make(cfg.schedule, cfg.steps)) {
  cfg_.validate();
  if (!schema_ || schema_->size() == 0) throw ValidationError("denoiser needs a class schema");
  if (page.width <= 0 || page.height <= 0) throw ValidationError("page must be positive");
  const int v = vocab_.size();
  embedding_ = nn::Param("embedding", v, cfg_.dim);
  round_bias_ = nn::Param("round_bias", 1, v);
  in_proj_ = nn::Linear("in_proj", cfg_.dim, cfg_.width);
  position_ = nn::Param("position", cfg_.seq_len(), cfg_.width);
  time_proj_ = nn::Linear("time_proj", cfg_.width, cfg_.width);
  for (int l = 0; l < cfg_.layers; ++l) {
    blocks_.emplace_back("block" + std::to_string(l), cfg_.width, cfg_.heads,
                         cfg_.width * cfg_.ffn_mult);
  }
  final_norm_ = nn::LayerNorm("final_norm", cfg_.width);
  out_proj_ = nn::Linear("out_proj", cfg_.width, cfg_.dim);
}

void Denoiser::init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  nn::init_normal(embedding_, 1.0f, rng);
  // Equal row norms make round(embed(s)) == s before any training.
  embedding_.value.rowwise().normalize();
  embedding_.value *= std::sqrt(static_cast<float>(cfg_.dim));
  round_bias_.value.setZero();
  in_proj_.init(rng);
  nn::init_normal(position_, 0.02f, rng);
  time_proj_.init(rng);
  const float out_gain = 1.0f / std::sqrt(2.0f * std::max(1, cfg_.layers));
  for (auto& b : blocks_) b.init(rng, out_gain);
  out_proj_.init(rng);
}

nn::ParamList Denoiser::params() {
  nn::ParamList out{&embedding_, &round_bias_};
  in_proj_.collect(out);
  out.push_back(&position_);
  time_proj_.collect(out);
  for (auto& b : blocks_) b.collect(out);
  final_norm_.collect(out);
  out_proj_.collect(out);
  return out;
}

std::vector<const nn::Param*> Denoiser::params() const {
  const auto all = const_cast<Denoiser*>(this)->params();
  return {all.begin(), all.end()};
}

std::size_t Denoiser::parameter_count() {
  std::size_t n = 0;
  for (const auto* p : params()) n += static_cast<std::size_t>(p->value.size());
  return n;
}

Mat Denoiser::embed(const std::vector<int>& tokens) const {
  Mat out(static_cast<Eigen::Index>(tokens.size()), cfg_.dim);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!vocab_.contains(tokens[i])) {
      throw ValidationError("token " + std::to_string(tokens[i]) + " outside the vocabulary");
    }
    out.row(static_cast<Eigen::Index>(i)) = embedding_.value.row(tokens[i]);
  }
  return out;
}

Mat Denoiser::logits(const Mat& x0) const {
  Mat z = x0 * embedding_.value.transpose();
  z.rowwise() += round_bias_.value.row(0);
  return z;
}

std::vector<int> Denoiser::round(const Mat& x0) const {
  const Mat z = logits(x0);
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    Eigen::Index arg = 0;
    z.row(r).maxCoeff(&arg);
    out[static_cast<std::size_t>(r)] = static_cast<int>(arg);
  }
  return out;
}

Mat Denoiser::time_features(const std::vector<int>& steps) const {
  const int half = cfg_.width / 2;
  Mat f = Mat::Zero(static_cast<Eigen::Index>(steps.size()), cfg_.width);
  for (std::size_t b = 0; b < steps.size(); ++b) {
    for (int i = 0; i < half; ++i) {
      const double freq = std::exp(-std::log(10000.0) * i / std::max(1, half));
      const double arg = steps[b] * freq;
      f(static_cast<Eigen::Index>(b), i) = static_cast<float>(std::sin(arg));
      f(static_cast<Eigen::Index>(b), half + i) = static_cast<float>(std::cos(arg));
    }
  }
  return f;
}

Mat Denoiser::forward(const Mat& x_t, const std::vector<int>& steps, Cache* cache) const {
  const int len = cfg_.seq_len();
  const int batch = static_cast<int>(steps.size());
  if (x_t.rows() != static_cast<Eigen::Index>(batch) * len || x_t.cols() != cfg_.dim) {
    throw ValidationError("latent shape does not match batch x sequence length x d");
  }
  for (int t : steps) {
    if (t < 1 || t > cfg_.steps) throw ValidationError("diffusion step out of range");
  }
  Mat tf = time_features(steps);
  const Mat temb = time_proj_.forward(tf);
  Mat h = in_proj_.forward(x_t);
  for (int b = 0; b < batch; ++b) {
    auto rows = h.middleRows(static_cast<Eigen::Index>(b) * len, len);
    rows += position_.value;
    rows.rowwise() += temb.row(b);
  }
  if (cache) {
    cache->x_t = x_t;
    cache->time_features = std::move(tf);
    cache->blocks.assign(blocks_.size(), {});
  }
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    h = blocks_[l].forward(h, batch, len, cache ? &cache->blocks[l] : nullptr);
  }
  Mat normed = final_norm_.forward(h, cache ? &cache->final_norm : nullptr);
  Mat out = out_proj_.forward(normed);
  if (cache) cache->normed = std::move(normed);
  return out;
}

Mat Denoiser::predict_x0(const Mat& x_t, const std::vector<int>& steps) const {
  return forward(x_t, steps, nullptr);
}

Denoiser::LossTerms Denoiser::loss_and_grad(const std::vector<int>& tokens,
                                            const std::vector<int>& steps, const Mat& noise) {
  const int len = cfg_.seq_len();
  const int batch = static_cast<int>(steps.size());
  if (batch == 0) throw ValidationError("loss needs a nonempty batch");
  if (tokens.size() != static_cast<std::size_t>(batch) * len) {
    throw ValidationError("token batch does not match steps x sequence length");
  }
  const Mat x0 = embed(tokens);
  if (noise.rows() != x0.rows() || noise.cols() != x0.cols()) {
    throw ValidationError("noise shape does not match the latent");
  }

  Mat x_t(x0.rows(), x0.cols());
  std::vector<float> signal(batch);
  for (int b = 0; b < batch; ++b) {
    const double ab = schedule_.alpha_bar(steps[b]);
    signal[b] = static_cast<float>(std::sqrt(ab));
    const auto s = static_cast<float>(std::sqrt(1.0 - ab));
    x_t.middleRows(b * len, len) =
        signal[b] * x0.middleRows(b * len, len) + s * noise.middleRows(b * len, len);
  }

  Cache cache;
  const Mat pred = forward(x_t, steps, &cache);
  const auto n_elem = static_cast<float>(x0.size());
  const auto n_tok = static_cast<float>(x0.rows());

  // Regression of x0, plus the prior term pulling sqrt(ab_T) x0 toward the
  // standard normal at t = T.
  const Mat diff = pred - x0;
  const auto ab_T = static_cast<float>(schedule_.alpha_bar(cfg_.steps));
  const double mse = diff.squaredNorm() / n_elem;
  const double prior = ab_T * x0.squaredNorm() / n_elem;

  // Rounding cross-entropy on clean embeddings.
  Mat z = logits(x0);
  double ce = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const float mx = z.row(r).maxCoeff();
    z.row(r) = (z.row(r).array() - mx).exp();
    const float sum = z.row(r).sum();
    const int tok = tokens[static_cast<std::size_t>(r)];
    ce -= std::log(z(r, tok) / sum);
    z.row(r) /= sum;
    z(r, tok) -= 1.0f;
  }
  ce /= n_tok;
  const Mat dlogits = z / n_tok;

  // Backward through the denoiser.
  const Mat dpred = (2.0f / n_elem) * diff;
  Mat dh = final_norm_.backward(out_proj_.backward(cache.normed, dpred), cache.final_norm);
  for (std::size_t l = blocks_.size(); l-- > 0;) {
    dh = blocks_[l].backward(dh, batch, len, cache.blocks[l]);
  }
  Mat dtemb(batch, cfg_.width);
  for (int b = 0; b < batch; ++b) {
    const auto rows = dh.middleRows(static_cast<Eigen::Index>(b) * len, len);
    position_.grad += rows;
    dtemb.row(b) = rows.colwise().sum();
  }
  time_proj_.backward(cache.time_features, dtemb);
  const Mat dx_t = in_proj_.backward(x_t, dh);

  // Gradient reaching the clean embedding through every path.
  Mat dx0 = -dpred + (2.0f * ab_T / n_elem) * x0 + dlogits * embedding_.value;
  for (int b = 0; b < batch; ++b) dx0.middleRows(b * len, len) += signal[b] * dx_t.middleRows(b * len, len);
  embedding_.grad.noalias() += dlogits.transpose() * x0;
  round_bias_.grad.row(0) += dlogits.colwise().sum();
  for (Eigen::Index r = 0; r < dx0.rows(); ++r) {
    embedding_.grad.row(tokens[static_cast<std::size_t>(r)]) += dx0.row(r);
  }

  LossTerms terms;
  terms.mse = mse + prior;
  terms.round = ce;
  terms.loss = terms.mse + terms.round;
  return terms;
}

}  // namespace doclayout::diffusion
