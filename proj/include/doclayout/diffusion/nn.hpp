#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Minimal layers with hand-written backward passes for the denoiser.
// Activations are row-major (tokens x features); every layer caches what its
// backward pass needs in a caller-owned struct.
namespace doclayout::diffusion::nn {

using Mat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::RowVectorXf;

struct Param {
  std::string name;
  Mat value;
  Mat grad;

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Mat::Zero(rows, cols)), grad(Mat::Zero(rows, cols)) {}
};

using ParamList = std::vector<Param*>;

void init_normal(Param& p, float stddev, std::mt19937_64& rng);

class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, int in, int out);

  void init(std::mt19937_64& rng, float gain = 1.0f);
  Mat forward(const Mat& x) const;
  // Accumulates weight gradients; returns dL/dx.
  Mat backward(const Mat& x, const Mat& dy);
  void collect(ParamList& out) { out.push_back(&weight_); out.push_back(&bias_); }

  const Param& weight() const { return weight_; }

 private:
  Param weight_;  // in x out
  Param bias_;    // 1 x out
};

class LayerNorm {
 public:
  struct Cache {
    Mat xhat;
    Eigen::VectorXf rstd;
  };

  LayerNorm() = default;
  LayerNorm(const std::string& name, int width);

  Mat forward(const Mat& x, Cache* cache) const;
  Mat backward(const Mat& dy, const Cache& cache);
  void collect(ParamList& out) { out.push_back(&gamma_); out.push_back(&beta_); }

 private:
  Param gamma_;
  Param beta_;
};

// tanh approximation.
Mat gelu(const Mat& x);
Mat gelu_backward(const Mat& x, const Mat& dy);

// Bidirectional multi-head self-attention over `batch` sequences of
// `length` rows each, stacked along the rows of x.
class SelfAttention {
 public:
  struct Cache {
    Mat x;
    Mat qkv;
    Mat context;
    std::vector<Mat> probs;  // batch*heads matrices of length x length
  };

  SelfAttention() = default;
  SelfAttention(const std::string& name, int width, int heads);

  void init(std::mt19937_64& rng, float out_gain);
  Mat forward(const Mat& x, int batch, int length, Cache* cache) const;
  Mat backward(const Mat& dy, int batch, int length, const Cache& cache);
  void collect(ParamList& out) { qkv_.collect(out); proj_.collect(out); }

 private:
  int width_ = 0;
  int heads_ = 1;
  Linear qkv_;
  Linear proj_;
};

class FeedForward {
 public:
  struct Cache {
    Mat x;
    Mat hidden;
    Mat activated;
  };

  FeedForward() = default;
  FeedForward(const std::string& name, int width, int hidden);

  void init(std::mt19937_64& rng, float out_gain);
  Mat forward(const Mat& x, Cache* cache) const;
  Mat backward(const Mat& dy, const Cache& cache);
  void collect(ParamList& out) { fc1_.collect(out); fc2_.collect(out); }

 private:
  Linear fc1_;
  Linear fc2_;
};

// Pre-norm transformer block.
class TransformerBlock {
 public:
  struct Cache {
    LayerNorm::Cache ln1;
    SelfAttention::Cache attn;
    LayerNorm::Cache ln2;
    FeedForward::Cache ffn;
  };

  TransformerBlock() = default;
  TransformerBlock(const std::string& name, int width, int heads, int hidden);

  void init(std::mt19937_64& rng, float out_gain);
  Mat forward(const Mat& x, int batch, int length, Cache* cache) const;
  Mat backward(const Mat& dy, int batch, int length, const Cache& cache);
  void collect(ParamList& out);

 private:
  LayerNorm ln1_;
  SelfAttention attn_;
  LayerNorm ln2_;
  FeedForward ffn_;
};

// Adam with bias correction and optional global-norm gradient clipping.
class Adam {
 public:
  Adam(ParamList params, float lr, float beta1 = 0.9f, float beta2 = 0.999f, float eps = 1e-8f);

  // Returns the pre-clip global gradient norm.
  float step(float clip_norm);
  void zero_grad();

 private:
  ParamList params_;
  std::vector<Mat> m_;
  std::vector<Mat> v_;
  float lr_;
  float beta1_;
  float beta2_;
  float eps_;
  long t_ = 0;
};

}  // namespace doclayout::diffusion::nn
