#include "doclayout/diffusion/nn.hpp"

#include <cmath>

namespace doclayout::diffusion::nn {

void init_normal(Param& p, float stddev, std::mt19937_64& rng) {
  std::normal_distribution<float> normal(0.0f, stddev);
  for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = normal(rng);
}

// ---------------------------------------------------------------- Linear

Linear::Linear(const std::string& name, int in, int out)
    : weight_(name + ".weight", in, out), bias_(name + ".bias", 1, out) {}

void Linear::init(std::mt19937_64& rng, float gain) {
  init_normal(weight_, gain / std::sqrt(static_cast<float>(weight_.value.rows())), rng);
  bias_.value.setZero();
}

Mat Linear::forward(const Mat& x) const {
  Mat y = x * weight_.value;
  y.rowwise() += bias_.value.row(0);
  return y;
}

Mat Linear::backward(const Mat& x, const Mat& dy) {
  weight_.grad.noalias() += x.transpose() * dy;
  bias_.grad.row(0) += dy.colwise().sum();
  return dy * weight_.value.transpose();
}

// ------------------------------------------------------------- LayerNorm

LayerNorm::LayerNorm(const std::string& name, int width)
    : gamma_(name + ".gamma", 1, width), beta_(name + ".beta", 1, width) {
  gamma_.value.setOnes();
}

Mat LayerNorm::forward(const Mat& x, Cache* cache) const {
  constexpr float kEps = 1e-5f;
  const Eigen::Index n = x.rows();
  const Eigen::Index w = x.cols();
  Mat xhat(n, w);
  Eigen::VectorXf rstd(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const float mean = x.row(r).mean();
    const float var = (x.row(r).array() - mean).square().mean();
    rstd(r) = 1.0f / std::sqrt(var + kEps);
    xhat.row(r) = (x.row(r).array() - mean) * rstd(r);
  }
  Mat y = (xhat.array().rowwise() * gamma_.value.row(0).array()).matrix();
  y.rowwise() += beta_.value.row(0);
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->rstd = std::move(rstd);
  }
  return y;
}

Mat LayerNorm::backward(const Mat& dy, const Cache& cache) {
  const Eigen::Index n = dy.rows();
  gamma_.grad.row(0) += dy.cwiseProduct(cache.xhat).colwise().sum();
  beta_.grad.row(0) += dy.colwise().sum();
  Mat dx(n, dy.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    const Vec dxhat = dy.row(r).cwiseProduct(gamma_.value.row(0));
    const float m1 = dxhat.mean();
    const float m2 = dxhat.cwiseProduct(cache.xhat.row(r)).mean();
    dx.row(r) = ((dxhat.array() - m1) - cache.xhat.row(r).array() * m2) * cache.rstd(r);
  }
  return dx;
}

// ------------------------------------------------------------------ GELU

namespace {
constexpr float kGeluK = 0.7978845608028654f;  // sqrt(2 / pi)
constexpr float kGeluC = 0.044715f;
}  // namespace

Mat gelu(const Mat& x) {
  const auto a = x.array();
  const Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> th = (kGeluK * (a + kGeluC * a.cube())).tanh();
  return (0.5f * a * (1.0f + th)).matrix();
}

Mat gelu_backward(const Mat& x, const Mat& dy) {
  const auto a = x.array();
  const Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> th =
      (kGeluK * (a + kGeluC * a.cube())).tanh();
  const auto d = 0.5f * (1.0f + th) +
                 0.5f * a * (1.0f - th.square()) * kGeluK * (1.0f + 3.0f * kGeluC * a.square());
  return (d * dy.array()).matrix();
}

// --------------------------------------------------------- SelfAttention

SelfAttention::SelfAttention(const std::string& name, int width, int heads)
    : width_(width),
      heads_(heads),
      qkv_(name + ".qkv", width, 3 * width),
      proj_(name + ".proj", width, width) {}

void SelfAttention::init(std::mt19937_64& rng, float out_gain) {
  qkv_.init(rng);
  proj_.init(rng, out_gain);
}

Mat SelfAttention::forward(const Mat& x, int batch, int length, Cache* cache) const {
  const int dh = width_ / heads_;
  const float scale = 1.0f / std::sqrt(static_cast<float>(dh));
  Mat qkv = qkv_.forward(x);
  Mat context(x.rows(), width_);
  if (cache) cache->probs.assign(static_cast<std::size_t>(batch) * heads_, Mat());
  for (int b = 0; b < batch; ++b) {
    for (int h = 0; h < heads_; ++h) {
      const auto q = qkv.block(b * length, h * dh, length, dh);
      const auto k = qkv.block(b * length, width_ + h * dh, length, dh);
      const auto v = qkv.block(b * length, 2 * width_ + h * dh, length, dh);
      Mat scores = (q * k.transpose()) * scale;
      for (int r = 0; r < length; ++r) {
        const float mx = scores.row(r).maxCoeff();
        scores.row(r) = (scores.row(r).array() - mx).exp();
        scores.row(r) /= scores.row(r).sum();
      }
      context.block(b * length, h * dh, length, dh).noalias() = scores * v;
      if (cache) cache->probs[b * heads_ + h] = std::move(scores);
    }
  }
  Mat out = proj_.forward(context);
  if (cache) {
    cache->x = x;
    cache->qkv = std::move(qkv);
    cache->context = std::move(context);
  }
  return out;
}

Mat SelfAttention::backward(const Mat& dy, int batch, int length, const Cache& cache) {
  const int dh = width_ / heads_;
  const float scale = 1.0f / std::sqrt(static_cast<float>(dh));
  const Mat dcontext = proj_.backward(cache.context, dy);
  Mat dqkv = Mat::Zero(cache.qkv.rows(), cache.qkv.cols());
  for (int b = 0; b < batch; ++b) {
    for (int h = 0; h < heads_; ++h) {
      const Mat& p = cache.probs[b * heads_ + h];
      const auto q = cache.qkv.block(b * length, h * dh, length, dh);
      const auto k = cache.qkv.block(b * length, width_ + h * dh, length, dh);
      const auto v = cache.qkv.block(b * length, 2 * width_ + h * dh, length, dh);
      const auto dout = dcontext.block(b * length, h * dh, length, dh);
      const Mat dp = dout * v.transpose();
      dqkv.block(b * length, 2 * width_ + h * dh, length, dh).noalias() = p.transpose() * dout;
      const Eigen::VectorXf row_dot = dp.cwiseProduct(p).rowwise().sum();
      const Mat ds = (p.array() * (dp.colwise() - row_dot).array()).matrix() * scale;
      dqkv.block(b * length, h * dh, length, dh).noalias() = ds * k;
      dqkv.block(b * length, width_ + h * dh, length, dh).noalias() = ds.transpose() * q;
    }
  }
  return qkv_.backward(cache.x, dqkv);
}

// ----------------------------------------------------------- FeedForward

FeedForward::FeedForward(const std::string& name, int width, int hidden)
    : fc1_(name + ".fc1", width, hidden), fc2_(name + ".fc2", hidden, width) {}

void FeedForward::init(std::mt19937_64& rng, float out_gain) {
  fc1_.init(rng);
  fc2_.init(rng, out_gain);
}

Mat FeedForward::forward(const Mat& x, Cache* cache) const {
  Mat hidden = fc1_.forward(x);
  Mat activated = gelu(hidden);
  Mat out = fc2_.forward(activated);
  if (cache) {
    cache->x = x;
    cache->hidden = std::move(hidden);
    cache->activated = std::move(activated);
  }
  return out;
}

Mat FeedForward::backward(const Mat& dy, const Cache& cache) {
  const Mat dact = fc2_.backward(cache.activated, dy);
  return fc1_.backward(cache.x, gelu_backward(cache.hidden, dact));
}

// ------------------------------------------------------ TransformerBlock

TransformerBlock::TransformerBlock(const std::string& name, int width, int heads, int hidden)
    : ln1_(name + ".ln1", width),
      attn_(name + ".attn", width, heads),
      ln2_(name + ".ln2", width),
      ffn_(name + ".ffn", width, hidden) {}

void TransformerBlock::init(std::mt19937_64& rng, float out_gain) {
  attn_.init(rng, out_gain);
  ffn_.init(rng, out_gain);
}

Mat TransformerBlock::forward(const Mat& x, int batch, int length, Cache* cache) const {
  Mat h = x + attn_.forward(ln1_.forward(x, cache ? &cache->ln1 : nullptr), batch, length,
                            cache ? &cache->attn : nullptr);
  Mat out = h + ffn_.forward(ln2_.forward(h, cache ? &cache->ln2 : nullptr),
                             cache ? &cache->ffn : nullptr);
  return out;
}

Mat TransformerBlock::backward(const Mat& dy, int batch, int length, const Cache& cache) {
  Mat dh = dy + ln2_.backward(ffn_.backward(dy, cache.ffn), cache.ln2);
  return dh + ln1_.backward(attn_.backward(dh, batch, length, cache.attn), cache.ln1);
}

void TransformerBlock::collect(ParamList& out) {
  ln1_.collect(out);
  attn_.collect(out);
  ln2_.collect(out);
  ffn_.collect(out);
}

// ------------------------------------------------------------------ Adam

Adam::Adam(ParamList params, float lr, float beta1, float beta2, float eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto* p : params_) {
    m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::zero_grad() {
  for (auto* p : params_) p->grad.setZero();
}

float Adam::step(float clip_norm) {
  double sq = 0.0;
  for (const auto* p : params_) sq += static_cast<double>(p->grad.squaredNorm());
  const float norm = static_cast<float>(std::sqrt(sq));
  const float clip = (clip_norm > 0.0f && norm > clip_norm) ? clip_norm / norm : 1.0f;

  ++t_;
  const float c1 = 1.0f - std::pow(beta1_, static_cast<float>(t_));
  const float c2 = 1.0f - std::pow(beta2_, static_cast<float>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i];
    m_[i] = beta1_ * m_[i] + (1.0f - beta1_) * clip * p.grad;
    v_[i] = beta2_ * v_[i] + (1.0f - beta2_) * (clip * p.grad).cwiseAbs2();
    p.value.array() -=
        lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
  return norm;
}

}  // namespace doclayout::diffusion::nn
