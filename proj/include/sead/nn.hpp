#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

// Reverse-mode autodiff over dense Eigen matrices, templated on the scalar so
// the same graph code runs in float for speed and in double for finite
// difference checks.

namespace sead::nn {

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
struct Param {
  std::string name;
  Mat<S> value;
  Mat<S> grad;
  Mat<S> m, v;  // adam moments, sized on first optimizer step

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

template <typename S>
class ParamStore {
 public:
  Param<S>& add(const std::string& name, int rows, int cols) {
    params_.push_back(Param<S>{});
    Param<S>& p = params_.back();
    p.name = name;
    p.value.setZero(rows, cols);
    p.grad.setZero(rows, cols);
    return p;
  }

  Param<S>* find(const std::string& name) {
    for (auto& p : params_)
      if (p.name == name) return &p;
    return nullptr;
  }

  void zero_grads() {
    for (auto& p : params_) p.zero_grad();
  }

  int64_t count() const {
    int64_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  size_t size() const { return params_.size(); }

 private:
  std::deque<Param<S>> params_;  // deque keeps Param* stable across add()
};

template <typename S>
class Tape {
 public:
  using M = Mat<S>;

  int input(M v) {
    int id = new_node();
    nodes_[id].value = std::move(v);
    nodes_[id].needs_grad = false;
    return id;
  }

  int param(Param<S>& p) {
    int id = new_node();
    nodes_[id].pref = &p;
    return id;
  }

  // a * b
  int matmul(int a, int b) {
    int id = new_node();
    nodes_[id].value.noalias() = value(a) * value(b);
    set_back(id, a, b, [a, b, id](Tape& t) {
      const M& g = t.grad_of(id);
      if (t.wants_grad(a)) t.grad_ref(a).noalias() += g * t.value(b).transpose();
      if (t.wants_grad(b)) t.grad_ref(b).noalias() += t.value(a).transpose() * g;
    });
    return id;
  }

  // a * b^T
  int matmul_nt(int a, int b) {
    int id = new_node();
    nodes_[id].value.noalias() = value(a) * value(b).transpose();
    set_back(id, a, b, [a, b, id](Tape& t) {
      const M& g = t.grad_of(id);
      if (t.wants_grad(a)) t.grad_ref(a).noalias() += g * t.value(b);
      if (t.wants_grad(b)) t.grad_ref(b).noalias() += g.transpose() * t.value(a);
    });
    return id;
  }

  int add(int a, int b) {
    int id = new_node();
    nodes_[id].value = value(a) + value(b);
    set_back(id, a, b, [a, b, id](Tape& t) {
      const M& g = t.grad_of(id);
      if (t.wants_grad(a)) t.grad_ref(a) += g;
      if (t.wants_grad(b)) t.grad_ref(b) += g;
    });
    return id;
  }

  // broadcast a 1 x n row vector over every row of a
  int add_rowvec(int a, int b) {
    int id = new_node();
    nodes_[id].value = value(a).rowwise() + value(b).row(0);
    set_back(id, a, b, [a, b, id](Tape& t) {
      const M& g = t.grad_of(id);
      if (t.wants_grad(a)) t.grad_ref(a) += g;
      if (t.wants_grad(b)) t.grad_ref(b).row(0) += g.colwise().sum();
    });
    return id;
  }

  int scale(int a, S k) {
    int id = new_node();
    nodes_[id].value = value(a) * k;
    set_back(id, a, -1, [a, k, id](Tape& t) {
      if (t.wants_grad(a)) t.grad_ref(a) += t.grad_of(id) * k;
    });
    return id;
  }

  // adds a constant matrix (positions, attention masks)
  int add_const(int a, const M& c) {
    int id = new_node();
    nodes_[id].value = value(a) + c;
    set_back(id, a, -1, [a, id](Tape& t) {
      if (t.wants_grad(a)) t.grad_ref(a) += t.grad_of(id);
    });
    return id;
  }

  int gelu(int a) {
    int id = new_node();
    const M& x = value(a);
    nodes_[id].value = x.unaryExpr([](S v) {
      return S(0.5) * v * (S(1) + S(std::erf(double(v) * 0.7071067811865475)));
    });
    set_back(id, a, -1, [a, id](Tape& t) {
      if (!t.wants_grad(a)) return;
      const M& x = t.value(a);
      const M& g = t.grad_of(id);
      M d = x.unaryExpr([](S v) {
        double xv = double(v);
        double cdf = 0.5 * (1.0 + std::erf(xv * 0.7071067811865475));
        double pdf = std::exp(-0.5 * xv * xv) * 0.3989422804014327;
        return S(cdf + xv * pdf);
      });
      t.grad_ref(a).array() += g.array() * d.array();
    });
    return id;
  }

  int softmax_rows(int a) {
    int id = new_node();
    const M& x = value(a);
    M y(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      S mx = x.row(r).maxCoeff();
      Eigen::Array<S, 1, Eigen::Dynamic> e = (x.row(r).array() - mx).exp();
      y.row(r) = e / e.sum();
    }
    nodes_[id].value = std::move(y);
    set_back(id, a, -1, [a, id](Tape& t) {
      if (!t.wants_grad(a)) return;
      const M& y = t.value(id);
      const M& g = t.grad_of(id);
      M& ga = t.grad_ref(a);
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        S dot = (g.row(r).array() * y.row(r).array()).sum();
        ga.row(r).array() +=
            y.row(r).array() * (g.row(r).array() - dot);
      }
    });
    return id;
  }

  // per-row normalization with learned gain and bias (both 1 x n)
  int layer_norm(int a, int gain, int bias, S eps = S(1e-5)) {
    int id = new_node();
    const M& x = value(a);
    const Eigen::Index n = x.cols();
    M xhat(x.rows(), n);
    Eigen::Array<S, Eigen::Dynamic, 1> inv(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      S mean = x.row(r).mean();
      Eigen::Array<S, 1, Eigen::Dynamic> c = x.row(r).array() - mean;
      S var = c.square().sum() / S(n);
      inv(r) = S(1) / std::sqrt(var + eps);
      xhat.row(r) = c * inv(r);
    }
    nodes_[id].value =
        (xhat.array().rowwise() * value(gain).row(0).array()).rowwise() +
        value(bias).row(0).array();
    auto xh = std::make_shared<M>(std::move(xhat));
    auto iv = std::make_shared<Eigen::Array<S, Eigen::Dynamic, 1>>(std::move(inv));
    set_back(id, a, gain, [a, gain, bias, id, xh, iv](Tape& t) {
      const M& g = t.grad_of(id);
      const Eigen::Index n = g.cols();
      if (t.wants_grad(bias)) t.grad_ref(bias).row(0) += g.colwise().sum();
      if (t.wants_grad(gain))
        t.grad_ref(gain).row(0) += (g.array() * xh->array()).colwise().sum().matrix();
      if (!t.wants_grad(a)) return;
      M& ga = t.grad_ref(a);
      const auto gr = t.value(gain).row(0).array();
      for (Eigen::Index r = 0; r < g.rows(); ++r) {
        Eigen::Array<S, 1, Eigen::Dynamic> gxh = g.row(r).array() * gr;
        S m1 = gxh.sum() / S(n);
        S m2 = (gxh * xh->row(r).array()).sum() / S(n);
        ga.row(r).array() +=
            (*iv)(r) * (gxh - m1 - xh->row(r).array() * m2);
      }
    });
    return id;
  }

  // embedding lookup; backward scatter-adds into the table rows
  int gather_rows(int table, const std::vector<int>& ids) {
    int id = new_node();
    const M& tb = value(table);
    M out(static_cast<Eigen::Index>(ids.size()), tb.cols());
    for (size_t i = 0; i < ids.size(); ++i) out.row(i) = tb.row(ids[i]);
    nodes_[id].value = std::move(out);
    auto idx = std::make_shared<std::vector<int>>(ids);
    set_back(id, table, -1, [table, id, idx](Tape& t) {
      if (!t.wants_grad(table)) return;
      const M& g = t.grad_of(id);
      M& gt = t.grad_ref(table);
      for (size_t i = 0; i < idx->size(); ++i)
        gt.row((*idx)[i]) += g.row(static_cast<Eigen::Index>(i));
    });
    return id;
  }

  int concat_cols(int a, int b) {
    int id = new_node();
    const M& x = value(a);
    const M& y = value(b);
    M out(x.rows(), x.cols() + y.cols());
    out << x, y;
    nodes_[id].value = std::move(out);
    const Eigen::Index ca = x.cols(), cb = y.cols();
    set_back(id, a, b, [a, b, id, ca, cb](Tape& t) {
      const M& g = t.grad_of(id);
      if (t.wants_grad(a)) t.grad_ref(a) += g.leftCols(ca);
      if (t.wants_grad(b)) t.grad_ref(b) += g.rightCols(cb);
    });
    return id;
  }

  int slice_cols(int a, int begin, int n) {
    int id = new_node();
    nodes_[id].value = value(a).middleCols(begin, n);
    set_back(id, a, -1, [a, id, begin, n](Tape& t) {
      if (t.wants_grad(a))
        t.grad_ref(a).middleCols(begin, n) += t.grad_of(id);
    });
    return id;
  }

  // inverted dropout; identity when p <= 0 or rng is null
  int dropout(int a, double p, std::mt19937_64* rng) {
    if (p <= 0.0 || rng == nullptr) return a;
    int id = new_node();
    const M& x = value(a);
    auto mask = std::make_shared<M>(x.rows(), x.cols());
    std::bernoulli_distribution keep(1.0 - p);
    const S inv = S(1.0 / (1.0 - p));
    for (Eigen::Index i = 0; i < x.size(); ++i)
      (*mask)(i) = keep(*rng) ? inv : S(0);
    nodes_[id].value = x.cwiseProduct(*mask);
    set_back(id, a, -1, [a, id, mask](Tape& t) {
      if (t.wants_grad(a))
        t.grad_ref(a) += t.grad_of(id).cwiseProduct(*mask);
    });
    return id;
  }

  // Sum over rows of -log Σ_{j in sup[r]} softmax(scores)_rj. Returns a 1x1
  // node. Every row must have at least one supervision index.
  int marginal_nll(int scores, const std::vector<std::vector<int>>& sup) {
    const M& x = value(scores);
    if (static_cast<size_t>(x.rows()) != sup.size())
      throw std::invalid_argument("marginal_nll: row/supervision mismatch");
    int id = new_node();
    auto probs = std::make_shared<M>(x.rows(), x.cols());
    auto qmass = std::make_shared<M>(M::Zero(x.rows(), x.cols()));
    S total = S(0);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      if (sup[r].empty())
        throw std::invalid_argument("marginal_nll: empty supervision row");
      S mx = x.row(r).maxCoeff();
      Eigen::Array<S, 1, Eigen::Dynamic> e = (x.row(r).array() - mx).exp();
      S z = e.sum();
      probs->row(r) = e / z;
      S psum = S(0);
      for (int j : sup[r]) psum += (*probs)(r, j);
      // restricted renormalized distribution over the supervision set
      for (int j : sup[r]) (*qmass)(r, j) = (*probs)(r, j) / psum;
      total -= std::log(psum);
    }
    nodes_[id].value = M::Constant(1, 1, total);
    set_back(id, scores, -1, [scores, id, probs, qmass](Tape& t) {
      if (!t.wants_grad(scores)) return;
      S g = t.grad_of(id)(0, 0);
      t.grad_ref(scores) += g * (*probs - *qmass);
    });
    return id;
  }

  void backward(int node, S seed = S(1)) {
    const M& v = value(node);
    grad_ref(node) = M::Constant(v.rows(), v.cols(), seed);
    for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
      Node& nd = nodes_[id];
      if (!nd.back) continue;
      if (nd.grad.size() == 0) continue;  // no consumer reached this node
      nd.back(*this);
    }
  }

  const M& value(int id) const {
    const Node& nd = nodes_[id];
    return nd.pref ? nd.pref->value : nd.value;
  }

  // gradient buffer, allocating zeros on first touch
  M& grad_ref(int id) {
    Node& nd = nodes_[id];
    if (nd.pref) return nd.pref->grad;
    if (nd.grad.size() == 0) {
      const M& v = value(id);
      nd.grad = M::Zero(v.rows(), v.cols());
    }
    return nd.grad;
  }

  bool wants_grad(int id) const {
    return nodes_[id].pref != nullptr || nodes_[id].needs_grad;
  }

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    M value;
    M grad;
    Param<S>* pref = nullptr;
    std::function<void(Tape&)> back;
    bool needs_grad = true;
  };

  const M& grad_of(int id) {
    return grad_ref(id);  // allocated by consumers before back() runs
  }

  int new_node() {
    nodes_.push_back(Node{});
    return static_cast<int>(nodes_.size()) - 1;
  }

  void set_back(int id, int a, int b, std::function<void(Tape&)> fn) {
    bool need = wants_grad(a) || (b >= 0 && wants_grad(b));
    nodes_[id].needs_grad = need;
    if (need) nodes_[id].back = std::move(fn);
  }

  std::vector<Node> nodes_;
};

// Decoupled weight decay Adam with linear warmup to a constant rate and a
// global gradient norm clip.
struct OptimConfig {
  double lr = 7e-5;
  int warmup_steps = 100;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 1.0;
};

template <typename S>
class AdamOptimizer {
 public:
  explicit AdamOptimizer(OptimConfig cfg) : cfg_(cfg) {}

  double current_lr() const {
    if (cfg_.warmup_steps <= 0) return cfg_.lr;
    double t = static_cast<double>(step_ + 1);
    return t < cfg_.warmup_steps ? cfg_.lr * t / cfg_.warmup_steps : cfg_.lr;
  }

  double global_grad_norm(ParamStore<S>& params) const {
    double sq = 0;
    for (auto& p : params) sq += double(p.grad.squaredNorm());
    return std::sqrt(sq);
  }

  void step(ParamStore<S>& params) {
    const double lr = current_lr();
    double scale = 1.0;
    if (cfg_.clip_norm > 0) {
      double norm = global_grad_norm(params);
      if (norm > cfg_.clip_norm) scale = cfg_.clip_norm / norm;
    }
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, step_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, step_);
    for (auto& p : params) {
      if (p.m.size() == 0) {
        p.m.setZero(p.value.rows(), p.value.cols());
        p.v.setZero(p.value.rows(), p.value.cols());
      }
      Mat<S> g = p.grad * S(scale);
      p.m = S(cfg_.beta1) * p.m + S(1 - cfg_.beta1) * g;
      p.v = S(cfg_.beta2) * p.v + S(1 - cfg_.beta2) * g.cwiseProduct(g);
      Mat<S> mhat = p.m / S(bc1);
      Mat<S> vhat = p.v / S(bc2);
      // decay weights only; biases and gains are 1-row params
      if (cfg_.weight_decay > 0 && p.value.rows() > 1)
        p.value -= S(lr * cfg_.weight_decay) * p.value;
      p.value.array() -=
          S(lr) * mhat.array() / (vhat.array().sqrt() + S(cfg_.eps));
    }
  }

  int64_t steps_taken() const { return step_; }

 private:
  OptimConfig cfg_;
  int64_t step_ = 0;
};

}  // namespace sead::nn
