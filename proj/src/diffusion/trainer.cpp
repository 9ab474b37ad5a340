#include "doclayout/diffusion/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace doclayout::diffusion {

using nlohmann::json;

void TrainConfig::validate() const {
  model.validate();
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("learning rate must be > 0");
  if (batch < 1) throw ValidationError("batch size must be >= 1");
  if (max_steps < 0) throw ValidationError("max_steps must be >= 0");
}

TokenizedCorpus tokenize_corpus(const std::vector<core::Layout>& corpus,
                                const core::Vocabulary& vocab, int max_boxes) {
  const std::size_t len = static_cast<std::size_t>(core::kTokensPerElement) * max_boxes + 2;
  TokenizedCorpus out;
  for (const auto& layout : corpus) {
    if (layout.size() > static_cast<std::size_t>(max_boxes)) {
      ++out.skipped_too_long;
      continue;
    }
    const auto seq = core::pad_to(core::quantize(layout, vocab), len, vocab);
    out.tokens.insert(out.tokens.end(), seq.tokens.begin(), seq.tokens.end());
    ++out.sequences;
  }
  return out;
}

namespace {

core::PageSize most_common_page(const std::vector<core::Layout>& corpus) {
  std::map<std::pair<int, int>, int> counts;
  for (const auto& l : corpus) ++counts[{l.page().width, l.page().height}];
  auto best = std::max_element(counts.begin(), counts.end(),
                               [](const auto& a, const auto& b) { return a.second < b.second; });
  return {best->first.first, best->first.second};
}

}  // namespace

TrainResult train(const std::vector<core::Layout>& corpus, const TrainConfig& cfg) {
  cfg.validate();
  if (corpus.empty()) throw ValidationError("training corpus is empty");
  core::require_shared_schema(corpus, "training corpus");

  Denoiser model(cfg.model, corpus.front().schema_ptr(), most_common_page(corpus));
  model.init(cfg.seed);
  const auto data = tokenize_corpus(corpus, model.vocab(), cfg.model.max_boxes);
  if (data.sequences == 0) {
    throw ValidationError("no layout fits in " + std::to_string(cfg.model.max_boxes) + " boxes");
  }

  TrainResult result{model, {}, data.skipped_too_long};
  Denoiser& m = result.model;
  nn::Adam adam(m.params(), static_cast<float>(cfg.lr));
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<int> pick(0, data.sequences - 1);
  std::uniform_int_distribution<int> pick_t(1, cfg.model.steps);
  std::normal_distribution<float> normal(0.0f, 1.0f);

  const int len = cfg.model.seq_len();
  std::vector<int> tokens(static_cast<std::size_t>(cfg.batch) * len);
  std::vector<int> steps(cfg.batch);
  Mat noise(static_cast<Eigen::Index>(cfg.batch) * len, cfg.model.dim);
  result.log.reserve(cfg.max_steps);

  for (int step = 1; step <= cfg.max_steps; ++step) {
    for (int b = 0; b < cfg.batch; ++b) {
      const int row = pick(rng);
      std::copy_n(data.tokens.begin() + static_cast<std::ptrdiff_t>(row) * len, len,
                  tokens.begin() + static_cast<std::ptrdiff_t>(b) * len);
      steps[b] = pick_t(rng);
    }
    for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = normal(rng);

    adam.zero_grad();
    const auto terms = m.loss_and_grad(tokens, steps, noise);
    if (!std::isfinite(terms.loss)) {
      std::ostringstream msg;
      msg << "training diverged at step " << step << ": loss=" << terms.loss
          << " mse=" << terms.mse << " round=" << terms.round;
      throw NumericalError(msg.str());
    }
    const float norm = adam.step(static_cast<float>(cfg.grad_clip));
    if (!std::isfinite(norm)) {
      throw NumericalError("non-finite gradient norm at step " + std::to_string(step));
    }
    result.log.push_back({step, terms.loss, terms.mse, terms.round});
  }
  return result;
}

void write_loss_csv(std::ostream& out, const std::vector<LossRecord>& log) {
  out << "step,loss,mse_term,round_term\n";
  out.precision(9);
  for (const auto& r : log) {
    out << r.step << ',' << r.loss << ',' << r.mse << ',' << r.round << '\n';
  }
}

// ------------------------------------------------------------- sampling

namespace {

std::mt19937_64 sequence_stream(std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), 0x5eedu};
  return std::mt19937_64(seq);
}

std::vector<int> sample_chunk(const Denoiser& model, const SampleOptions& opts, int first,
                              int count) {
  const auto& cfg = model.config();
  const int len = cfg.seq_len();
  const auto& schedule = model.schedule();
  std::vector<std::mt19937_64> streams;
  for (int i = 0; i < count; ++i) streams.push_back(sequence_stream(opts.seed, first + i));
  std::normal_distribution<float> normal(0.0f, 1.0f);
  auto fill_noise = [&](Mat& m) {
    for (int i = 0; i < count; ++i) {
      for (Eigen::Index r = 0; r < len; ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
          m(static_cast<Eigen::Index>(i) * len + r, c) = normal(streams[i]);
        }
      }
    }
  };

  Mat x(static_cast<Eigen::Index>(count) * len, cfg.dim);
  fill_noise(x);
  Mat z(x.rows(), x.cols());
  Mat x0;
  for (int t = cfg.steps; t >= 1; --t) {
    x0 = model.predict_x0(x, std::vector<int>(count, t));
    if (opts.clamp) x0 = model.embed(model.round(x0));
    if (t == 1) break;
    const auto post = schedule.posterior(t);
    fill_noise(z);
    x = static_cast<float>(post.coef_x0) * x0 + static_cast<float>(post.coef_xt) * x +
        static_cast<float>(std::sqrt(post.variance)) * z;
  }
  return model.round(x0);
}

}  // namespace

SampleResult sample(const Denoiser& model, const SampleOptions& opts) {
  if (opts.count < 0) throw ValidationError("sample count must be >= 0");
  SampleResult result;
  if (opts.count == 0) return result;

  constexpr int kChunk = 32;
  const int len = model.config().seq_len();
  const int chunks = (opts.count + kChunk - 1) / kChunk;
  std::vector<std::vector<int>> tokens(chunks);
  unsigned threads = opts.threads > 0 ? static_cast<unsigned>(opts.threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(chunks));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int c = next++; c < chunks; c = next++) {
      const int first = c * kChunk;
      tokens[c] = sample_chunk(model, opts, first, std::min(kChunk, opts.count - first));
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const auto& chunk : tokens) {
    for (std::size_t off = 0; off < chunk.size(); off += len) {
      core::TokenSequence seq{{chunk.begin() + off, chunk.begin() + off + len}, model.page()};
      auto decoded = core::dequantize(seq, model.vocab(), model.schema(), core::RepairMode::kRepair);
      if (decoded.structurally_valid()) ++result.valid;
      result.dropped_groups += decoded.dropped_groups;
      result.layouts.push_back(std::move(decoded.layout));
      result.sequences.push_back(std::move(seq));
    }
  }
  return result;
}

// ----------------------------------------------------------- checkpoint

namespace {
constexpr int kCheckpointVersion = 1;
}

void save_checkpoint(const Denoiser& model, std::ostream& out) {
  const auto& c = model.config();
  json j;
  j["format"] = "doclayout-denoiser";
  j["version"] = kCheckpointVersion;
  j["config"] = {{"grid", c.grid},         {"max_boxes", c.max_boxes}, {"dim", c.dim},
                 {"width", c.width},       {"layers", c.layers},       {"heads", c.heads},
                 {"ffn_mult", c.ffn_mult}, {"steps", c.steps},
                 {"schedule", std::string(to_string(c.schedule))}};
  j["schema"] = model.schema()->names();
  j["page"] = {model.page().width, model.page().height};
  json params = json::object();
  for (const auto* p : model.params()) {
    params[p->name] = {{"rows", p->value.rows()},
                       {"cols", p->value.cols()},
                       {"data", std::vector<float>(p->value.data(),
                                                   p->value.data() + p->value.size())}};
  }
  j["params"] = std::move(params);
  out << j.dump() << '\n';
  if (!out) throw ValidationError("failed to write checkpoint");
}

void save_checkpoint_file(const Denoiser& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  save_checkpoint(model, out);
}

Denoiser load_checkpoint(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "doclayout-denoiser" || j.at("version") != kCheckpointVersion) {
      throw FormatError("unsupported checkpoint format");
    }
    const auto& jc = j.at("config");
    ModelConfig c;
    c.grid = jc.at("grid");
    c.max_boxes = jc.at("max_boxes");
    c.dim = jc.at("dim");
    c.width = jc.at("width");
    c.layers = jc.at("layers");
    c.heads = jc.at("heads");
    c.ffn_mult = jc.at("ffn_mult");
    c.steps = jc.at("steps");
    c.schedule = parse_schedule_kind(jc.at("schedule").get<std::string>());
    auto schema = std::make_shared<const core::ClassSchema>(
        j.at("schema").get<std::vector<std::string>>());
    const core::PageSize page{j.at("page").at(0), j.at("page").at(1)};
    Denoiser model(c, schema, page);
    const auto& jp = j.at("params");
    for (auto* p : model.params()) {
      const auto& e = jp.at(p->name);
      const auto data = e.at("data").get<std::vector<float>>();
      if (e.at("rows") != p->value.rows() || e.at("cols") != p->value.cols() ||
          data.size() != static_cast<std::size_t>(p->value.size())) {
        throw FormatError("checkpoint tensor '" + p->name + "' has the wrong shape");
      }
      std::copy(data.begin(), data.end(), p->value.data());
      if (!p->value.allFinite()) throw FormatError("checkpoint tensor '" + p->name + "' is not finite");
    }
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
}

Denoiser load_checkpoint_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open checkpoint '" + path + "'");
  return load_checkpoint(in);
}

}  // namespace doclayout::diffusion
