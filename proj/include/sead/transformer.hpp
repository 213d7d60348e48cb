#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sead/nn.hpp"

// Post-LN encoder-decoder transformer with a hybrid output head: vocabulary
// scores concatenated with bilinear pointer scores against the encoder
// states, softmaxed jointly. Templated on the scalar so gradient checks run
// in double while training runs in float.

namespace sead {

struct ModelConfig {
  int layers = 2;       // encoder and decoder depth
  int hidden = 128;
  int heads = 4;
  int ffn = 256;
  double dropout = 0.1;
  int max_positions = 256;
  bool pointer_enabled = true;
};

class SequenceTooLongError : public std::runtime_error {
 public:
  SequenceTooLongError(size_t len, size_t limit)
      : std::runtime_error("sequence of length " + std::to_string(len) +
                           " exceeds the position limit " +
                           std::to_string(limit)) {}
};

// Joint distribution over [vocabulary ids | source positions], always
// accumulated in double so it sums to 1 within 1e-6 regardless of the
// model scalar.
struct HybridDistribution {
  int vocab_size = 0;
  std::vector<double> probs;  // size vocab_size + source length

  size_t size() const { return probs.size(); }
  double vocab_prob(int id) const { return probs[id]; }
  double pointer_prob(int pos) const { return probs[vocab_size + pos]; }
};

template <typename S>
HybridDistribution hybrid_distribution(
    const Eigen::Matrix<S, 1, Eigen::Dynamic>& scores, int vocab_size) {
  HybridDistribution d;
  d.vocab_size = vocab_size;
  d.probs.resize(scores.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    mx = std::max(mx, double(scores(i)));
  double z = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    d.probs[i] = std::exp(double(scores(i)) - mx);
    z += d.probs[i];
  }
  for (auto& p : d.probs) p /= z;
  return d;
}

template <typename S>
class TransformerT {
 public:
  using M = nn::Mat<S>;
  using Row = Eigen::Matrix<S, 1, Eigen::Dynamic>;

  struct AttnParams {
    nn::Param<S>*wq, *bq, *wk, *bk, *wv, *bv, *wo, *bo;
  };
  struct LnParams {
    nn::Param<S>*g, *b;
  };
  struct EncLayer {
    AttnParams self;
    LnParams ln1;
    nn::Param<S>*w1, *b1, *w2, *b2;
    LnParams ln2;
  };
  struct DecLayer {
    AttnParams self;
    LnParams ln1;
    AttnParams cross;
    LnParams ln2;
    nn::Param<S>*w1, *b1, *w2, *b2;
    LnParams ln3;
  };

  TransformerT(const ModelConfig& cfg, int vocab_size, uint64_t seed)
      : cfg_(cfg), vocab_size_(vocab_size) {
    if (cfg.hidden % cfg.heads != 0)
      throw std::invalid_argument("hidden size must divide into heads");
    if (cfg.layers < 1) throw std::invalid_argument("need at least one layer");
    build_params();
    init_params(seed);
    build_positions();
  }

  const ModelConfig& config() const { return cfg_; }
  int vocab_size() const { return vocab_size_; }
  nn::ParamStore<S>& params() { return params_; }
  const nn::ParamStore<S>& params() const { return params_; }

  // ---- training graph -----------------------------------------------------

  struct LossGraph {
    int loss = -1;     // 1x1 node, sum of per-position nll
    int scores = -1;   // rows x (V + |src|) node
    int rows = 0;
  };

  // Teacher-forced joint loss. tgt_in starts with the begin token;
  // supervision has one index set per tgt_in row (the shifted target plus
  // end token, in hybrid index space).
  LossGraph build_loss(nn::Tape<S>& tape, const std::vector<int>& src_ids,
                       const std::vector<int>& tgt_in,
                       const std::vector<std::vector<int>>& supervision,
                       std::mt19937_64* dropout_rng) const {
    check_len(src_ids.size());
    check_len(tgt_in.size());
    if (supervision.size() != tgt_in.size())
      throw std::invalid_argument("supervision size must match tgt_in");
    int henc = encoder_forward(tape, src_ids, dropout_rng);
    int hdec = decoder_forward(tape, tgt_in, henc, dropout_rng);
    int scores = output_scores(tape, hdec, henc);
    LossGraph out;
    out.scores = scores;
    out.rows = static_cast<int>(tgt_in.size());
    out.loss = tape.marginal_nll(scores, supervision);
    return out;
  }

  // ---- inference ----------------------------------------------------------

  // Deterministic (dropout-free) encoder pass.
  M encode(const std::vector<int>& src_ids) const {
    check_len(src_ids.size());
    nn::Tape<S> tape;
    int henc = encoder_forward(tape, src_ids, nullptr);
    return tape.value(henc);
  }

  struct Session {
    const TransformerT* model = nullptr;
    M enc;  // source states, S_enc x d
    struct LayerState {
      M k, v;  // growing self-attention cache, max_positions x d
      int used = 0;
      M cross_k, cross_v;  // fixed, S_enc x d
    };
    std::vector<LayerState> layers;
    int step = 0;

    // Feeds one target token, returns hybrid scores over
    // [vocab | source positions].
    Row feed(int token_id) {
      return model->session_feed(*this, token_id);
    }
  };

  Session start_session(M enc_states) const {
    Session s;
    s.model = this;
    s.enc = std::move(enc_states);
    s.layers.resize(cfg_.layers);
    for (int l = 0; l < cfg_.layers; ++l) {
      auto& st = s.layers[l];
      st.k.setZero(cfg_.max_positions, cfg_.hidden);
      st.v.setZero(cfg_.max_positions, cfg_.hidden);
      const DecLayer& dl = dec_[l];
      st.cross_k = (s.enc * dl.cross.wk->value).rowwise() + dl.cross.bk->value.row(0);
      st.cross_v = (s.enc * dl.cross.wv->value).rowwise() + dl.cross.bv->value.row(0);
    }
    return s;
  }

  // Full-prefix convenience wrapper: feeds prefix_ids (beginning with the
  // begin token) and returns the distribution for the next position.
  HybridDistribution decode_step(const M& enc_states,
                                 const std::vector<int>& prefix_ids) const {
    if (prefix_ids.empty())
      throw std::invalid_argument("decode_step needs a nonempty prefix");
    Session s = start_session(enc_states);
    Row scores;
    for (int id : prefix_ids) scores = s.feed(id);
    return hybrid_distribution<S>(scores, vocab_size_);
  }

  // ---- checkpoints ---------------------------------------------------------

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    const char magic[8] = {'S', 'E', 'A', 'D', 'C', 'K', 'P', 'T'};
    out.write(magic, 8);
    write_u32(out, 1);  // version
    write_u32(out, sizeof(S));
    write_u32(out, cfg_.layers);
    write_u32(out, cfg_.hidden);
    write_u32(out, cfg_.heads);
    write_u32(out, cfg_.ffn);
    write_u32(out, cfg_.max_positions);
    write_u32(out, cfg_.pointer_enabled ? 1 : 0);
    double drop = cfg_.dropout;
    out.write(reinterpret_cast<const char*>(&drop), sizeof(double));
    write_u32(out, vocab_size_);
    write_u32(out, static_cast<uint32_t>(params_.size()));
    for (const auto& p : params_) {
      write_u32(out, static_cast<uint32_t>(p.name.size()));
      out.write(p.name.data(), p.name.size());
      write_u32(out, static_cast<uint32_t>(p.value.rows()));
      write_u32(out, static_cast<uint32_t>(p.value.cols()));
      out.write(reinterpret_cast<const char*>(p.value.data()),
                sizeof(S) * p.value.size());
    }
    if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
  }

  static TransformerT load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != "SEADCKPT")
      throw std::runtime_error("not a checkpoint file: " + path);
    uint32_t version = read_u32(in);
    if (version != 1)
      throw std::runtime_error("unsupported checkpoint version");
    uint32_t ssize = read_u32(in);
    if (ssize != sizeof(S))
      throw std::runtime_error("checkpoint scalar width mismatch");
    ModelConfig cfg;
    cfg.layers = read_u32(in);
    cfg.hidden = read_u32(in);
    cfg.heads = read_u32(in);
    cfg.ffn = read_u32(in);
    cfg.max_positions = read_u32(in);
    cfg.pointer_enabled = read_u32(in) != 0;
    in.read(reinterpret_cast<char*>(&cfg.dropout), sizeof(double));
    int vocab = read_u32(in);
    uint32_t n_params = read_u32(in);
    TransformerT model(cfg, vocab, 0);
    if (n_params != model.params_.size())
      throw std::runtime_error("checkpoint parameter count mismatch");
    for (auto& p : model.params_) {
      uint32_t name_len = read_u32(in);
      std::string name(name_len, '\0');
      in.read(name.data(), name_len);
      if (name != p.name)
        throw std::runtime_error("checkpoint parameter order mismatch at " + name);
      uint32_t rows = read_u32(in), cols = read_u32(in);
      if (rows != p.value.rows() || cols != p.value.cols())
        throw std::runtime_error("checkpoint shape mismatch at " + name);
      in.read(reinterpret_cast<char*>(p.value.data()), sizeof(S) * p.value.size());
    }
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    return model;
  }

  // deep parameter snapshot for best-epoch restores
  std::vector<M> snapshot() const {
    std::vector<M> out;
    for (const auto& p : params_) out.push_back(p.value);
    return out;
  }
  void restore(const std::vector<M>& snap) {
    size_t i = 0;
    for (auto& p : params_) p.value = snap.at(i++);
  }

 private:
  // ---- parameter construction ----------------------------------------------

  void build_params() {
    const int d = cfg_.hidden;
    emb_ = &params_.add("emb", vocab_size_, d);
    auto attn = [&](const std::string& prefix) {
      AttnParams a;
      a.wq = &params_.add(prefix + ".wq", d, d);
      a.bq = &params_.add(prefix + ".bq", 1, d);
      a.wk = &params_.add(prefix + ".wk", d, d);
      a.bk = &params_.add(prefix + ".bk", 1, d);
      a.wv = &params_.add(prefix + ".wv", d, d);
      a.bv = &params_.add(prefix + ".bv", 1, d);
      a.wo = &params_.add(prefix + ".wo", d, d);
      a.bo = &params_.add(prefix + ".bo", 1, d);
      return a;
    };
    auto ln = [&](const std::string& prefix) {
      LnParams l;
      l.g = &params_.add(prefix + ".g", 1, d);
      l.b = &params_.add(prefix + ".b", 1, d);
      return l;
    };
    for (int i = 0; i < cfg_.layers; ++i) {
      std::string p = "enc" + std::to_string(i);
      EncLayer layer;
      layer.self = attn(p + ".self");
      layer.ln1 = ln(p + ".ln1");
      layer.w1 = &params_.add(p + ".ffn.w1", d, cfg_.ffn);
      layer.b1 = &params_.add(p + ".ffn.b1", 1, cfg_.ffn);
      layer.w2 = &params_.add(p + ".ffn.w2", cfg_.ffn, d);
      layer.b2 = &params_.add(p + ".ffn.b2", 1, d);
      layer.ln2 = ln(p + ".ln2");
      enc_.push_back(layer);
    }
    for (int i = 0; i < cfg_.layers; ++i) {
      std::string p = "dec" + std::to_string(i);
      DecLayer layer;
      layer.self = attn(p + ".self");
      layer.ln1 = ln(p + ".ln1");
      layer.cross = attn(p + ".cross");
      layer.ln2 = ln(p + ".ln2");
      layer.w1 = &params_.add(p + ".ffn.w1", d, cfg_.ffn);
      layer.b1 = &params_.add(p + ".ffn.b1", 1, cfg_.ffn);
      layer.w2 = &params_.add(p + ".ffn.w2", cfg_.ffn, d);
      layer.b2 = &params_.add(p + ".ffn.b2", 1, d);
      layer.ln3 = ln(p + ".ln3");
      dec_.push_back(layer);
    }
    w_vocab_ = &params_.add("head.w_vocab", d, vocab_size_);
    b_vocab_ = &params_.add("head.b_vocab", 1, vocab_size_);
    w_ptr_ = &params_.add("head.w_ptr", d, d);
  }

  void init_params(uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5ead5eedULL);
    for (auto& p : params_) {
      const bool is_gain = p.name.size() > 2 &&
                           p.name.compare(p.name.size() - 2, 2, ".g") == 0 &&
                           p.name.find(".ln") != std::string::npos;
      const bool is_bias = p.value.rows() == 1;
      if (is_gain) {
        p.value.setOnes();
      } else if (is_bias) {
        p.value.setZero();
      } else if (p.name == "emb") {
        std::normal_distribution<double> d(0.0, 0.02);
        for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value(i) = S(d(rng));
      } else {
        double std_dev =
            std::sqrt(2.0 / double(p.value.rows() + p.value.cols()));
        std::normal_distribution<double> d(0.0, std_dev);
        for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value(i) = S(d(rng));
      }
    }
  }

  void build_positions() {
    const int d = cfg_.hidden;
    pos_.resize(cfg_.max_positions, d);
    for (int p = 0; p < cfg_.max_positions; ++p) {
      for (int i = 0; i < d; i += 2) {
        double angle = p / std::pow(10000.0, double(i) / d);
        pos_(p, i) = S(std::sin(angle));
        if (i + 1 < d) pos_(p, i + 1) = S(std::cos(angle));
      }
    }
  }

  void check_len(size_t n) const {
    if (n == 0) throw std::invalid_argument("empty sequence");
    if (n > static_cast<size_t>(cfg_.max_positions))
      throw SequenceTooLongError(n, cfg_.max_positions);
  }

  // ---- tape forward --------------------------------------------------------

  int embed(nn::Tape<S>& tape, const std::vector<int>& ids,
            std::mt19937_64* rng) const {
    int x = tape.gather_rows(tape.param(*emb_), ids);
    x = tape.scale(x, S(std::sqrt(double(cfg_.hidden))));
    x = tape.add_const(x, pos_.topRows(ids.size()));
    return tape.dropout(x, cfg_.dropout, rng);
  }

  int attention(nn::Tape<S>& tape, const AttnParams& a, int xq, int xkv,
                const M* mask) const {
    const int d = cfg_.hidden;
    const int dh = d / cfg_.heads;
    int q = tape.add_rowvec(tape.matmul(xq, tape.param(*a.wq)), tape.param(*a.bq));
    int k = tape.add_rowvec(tape.matmul(xkv, tape.param(*a.wk)), tape.param(*a.bk));
    int v = tape.add_rowvec(tape.matmul(xkv, tape.param(*a.wv)), tape.param(*a.bv));
    int cat = -1;
    for (int h = 0; h < cfg_.heads; ++h) {
      int qh = tape.slice_cols(q, h * dh, dh);
      int kh = tape.slice_cols(k, h * dh, dh);
      int vh = tape.slice_cols(v, h * dh, dh);
      int sc = tape.scale(tape.matmul_nt(qh, kh), S(1.0 / std::sqrt(double(dh))));
      if (mask) sc = tape.add_const(sc, *mask);
      int ch = tape.matmul(tape.softmax_rows(sc), vh);
      cat = h == 0 ? ch : tape.concat_cols(cat, ch);
    }
    return tape.add_rowvec(tape.matmul(cat, tape.param(*a.wo)), tape.param(*a.bo));
  }

  int ffn_block(nn::Tape<S>& tape, int x, nn::Param<S>* w1, nn::Param<S>* b1,
                nn::Param<S>* w2, nn::Param<S>* b2) const {
    int h = tape.gelu(tape.add_rowvec(tape.matmul(x, tape.param(*w1)), tape.param(*b1)));
    return tape.add_rowvec(tape.matmul(h, tape.param(*w2)), tape.param(*b2));
  }

  int sublayer(nn::Tape<S>& tape, int x, int out, const LnParams& ln,
               std::mt19937_64* rng) const {
    int res = tape.add(x, tape.dropout(out, cfg_.dropout, rng));
    return tape.layer_norm(res, tape.param(*ln.g), tape.param(*ln.b));
  }

  int encoder_forward(nn::Tape<S>& tape, const std::vector<int>& ids,
                      std::mt19937_64* rng) const {
    int x = embed(tape, ids, rng);
    for (const EncLayer& l : enc_) {
      x = sublayer(tape, x, attention(tape, l.self, x, x, nullptr), l.ln1, rng);
      x = sublayer(tape, x, ffn_block(tape, x, l.w1, l.b1, l.w2, l.b2), l.ln2, rng);
    }
    return x;
  }

  int decoder_forward(nn::Tape<S>& tape, const std::vector<int>& ids, int henc,
                      std::mt19937_64* rng) const {
    const Eigen::Index t = static_cast<Eigen::Index>(ids.size());
    M mask = M::Zero(t, t);
    for (Eigen::Index i = 0; i < t; ++i)
      for (Eigen::Index j = i + 1; j < t; ++j) mask(i, j) = S(-1e9);
    int x = embed(tape, ids, rng);
    for (const DecLayer& l : dec_) {
      x = sublayer(tape, x, attention(tape, l.self, x, x, &mask), l.ln1, rng);
      x = sublayer(tape, x, attention(tape, l.cross, x, henc, nullptr), l.ln2, rng);
      x = sublayer(tape, x, ffn_block(tape, x, l.w1, l.b1, l.w2, l.b2), l.ln3, rng);
    }
    return x;
  }

  int output_scores(nn::Tape<S>& tape, int hdec, int henc) const {
    int vs = tape.add_rowvec(tape.matmul(hdec, tape.param(*w_vocab_)),
                             tape.param(*b_vocab_));
    if (!cfg_.pointer_enabled) return vs;
    int hp = tape.matmul(hdec, tape.param(*w_ptr_));
    int ss = tape.matmul_nt(hp, henc);
    return tape.concat_cols(vs, ss);
  }

  // ---- incremental decode ---------------------------------------------------

  Row session_feed(Session& s, int token_id) const {
    if (s.step >= cfg_.max_positions)
      throw SequenceTooLongError(s.step + 1, cfg_.max_positions);
    const int d = cfg_.hidden;
    const int dh = d / cfg_.heads;
    Row x = emb_->value.row(token_id) * S(std::sqrt(double(d)));
    x += pos_.row(s.step);
    for (int l = 0; l < cfg_.layers; ++l) {
      const DecLayer& dl = dec_[l];
      auto& st = s.layers[l];
      {
        Row q = x * dl.self.wq->value + dl.self.bq->value.row(0);
        st.k.row(st.used) = x * dl.self.wk->value + dl.self.bk->value.row(0);
        st.v.row(st.used) = x * dl.self.wv->value + dl.self.bv->value.row(0);
        ++st.used;
        x = row_ln(x + attn_row(q, st.k.topRows(st.used), st.v.topRows(st.used),
                                dl.self, dh),
                   dl.ln1);
      }
      {
        Row q = x * dl.cross.wq->value + dl.cross.bq->value.row(0);
        x = row_ln(x + attn_row(q, st.cross_k, st.cross_v, dl.cross, dh), dl.ln2);
      }
      {
        Row h = x * dl.w1->value + dl.b1->value.row(0);
        for (Eigen::Index i = 0; i < h.size(); ++i) {
          double hv = double(h(i));
          h(i) = S(0.5 * hv * (1.0 + std::erf(hv * 0.7071067811865475)));
        }
        x = row_ln(x + (h * dl.w2->value + dl.b2->value.row(0)).eval(), dl.ln3);
      }
    }
    ++s.step;
    Row vs = x * w_vocab_->value + b_vocab_->value.row(0);
    if (!cfg_.pointer_enabled) return vs;
    Row hp = x * w_ptr_->value;
    Row ss = hp * s.enc.transpose();
    Row out(vs.size() + ss.size());
    out << vs, ss;
    return out;
  }

  Row attn_row(const Row& q, const Eigen::Ref<const M>& K,
               const Eigen::Ref<const M>& V, const AttnParams& a, int dh) const {
    const int d = cfg_.hidden;
    Row ctx(d);
    for (int h = 0; h < cfg_.heads; ++h) {
      Row qh = q.segment(h * dh, dh);
      Eigen::Matrix<S, Eigen::Dynamic, 1> sc =
          K.middleCols(h * dh, dh) * qh.transpose() / S(std::sqrt(double(dh)));
      S mx = sc.maxCoeff();
      Eigen::Array<S, Eigen::Dynamic, 1> e = (sc.array() - mx).exp();
      e /= e.sum();
      ctx.segment(h * dh, dh) =
          (e.matrix().transpose() * V.middleCols(h * dh, dh));
    }
    return ctx * a.wo->value + a.bo->value.row(0);
  }

  Row row_ln(const Row& x, const LnParams& ln) const {
    const Eigen::Index n = x.size();
    S mean = x.mean();
    Eigen::Array<S, 1, Eigen::Dynamic> c = x.array() - mean;
    S var = c.square().sum() / S(n);
    S inv = S(1) / std::sqrt(var + S(1e-5));
    return ((c * inv) * ln.g->value.row(0).array() + ln.b->value.row(0).array())
        .matrix();
  }

  static void write_u32(std::ofstream& out, uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  static uint32_t read_u32(std::ifstream& in) {
    uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
  }

  ModelConfig cfg_;
  int vocab_size_;
  nn::ParamStore<S> params_;
  nn::Param<S>* emb_ = nullptr;
  std::vector<EncLayer> enc_;
  std::vector<DecLayer> dec_;
  nn::Param<S>*w_vocab_, *b_vocab_, *w_ptr_;
  M pos_;
};

using Transformer = TransformerT<float>;

}  // namespace sead
